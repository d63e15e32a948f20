#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "uwbicl/channel.hpp"
#include "uwbicl/errors.hpp"
#include "uwbicl/localization.hpp"

using namespace uwbicl;

namespace {

std::vector<Eigen::VectorXd> room_anchors() {
  return {Eigen::Vector3d(2, 5, 2), Eigen::Vector3d(4, 8, 3), Eigen::Vector3d(5, 5, 3), Eigen::Vector3d(7, 3, 2)};
}

std::vector<double> delays(const std::vector<Eigen::VectorXd>& a, const Eigen::VectorXd& p, double common = 0.0) {
  std::vector<double> b;
  for (const auto& x : a) b.push_back((x - p).norm() / kSpeedOfLight + common);
  return b;
}

}  // namespace

TEST_CASE("exact TDOA data recovers the position") {
  const auto a = room_anchors();
  const Eigen::Vector3d p(4.5, 5.0, 1.2);
  const auto fix = tdoa_solve(delays(a, p), a, centroid(a));
  CHECK((fix.position - p).norm() < 1e-6);
  CHECK(fix.residual < 1e-6);
  CHECK(fix.anchors.size() == 4);
}

TEST_CASE("common offset leaves the TDOA fix unchanged") {
  const auto a = room_anchors();
  const Eigen::Vector3d p(3.7, 5.9, 2.1);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z(0.0, 0.2e-9);
  auto beta = delays(a, p);
  for (auto& b : beta) b += z(rng);
  const auto f0 = tdoa_solve(beta, a, centroid(a));
  for (double off : {1e-9, -37e-9, 2.5e-6}) {
    auto shifted = beta;
    for (auto& b : shifted) b += off;
    const auto f1 = tdoa_solve(shifted, a, centroid(a));
    CHECK((f1.position - f0.position).norm() < 1e-9);
  }
}

TEST_CASE("solver converges quickly on a grid inside the anchor hull") {
  const auto a = room_anchors();
  Eigen::Matrix3d T;
  for (int i = 0; i < 3; ++i) T.col(i) = a[static_cast<std::size_t>(i) + 1] - a[0];
  const Eigen::Matrix3d Tinv = T.inverse();
  int points = 0;
  for (double x = 2.0; x <= 7.0; x += 0.5)
    for (double y = 3.0; y <= 8.0; y += 0.5)
      for (double z = 2.0; z <= 3.0; z += 0.5) {
        const Eigen::Vector3d p(x, y, z);
        const Eigen::Vector3d l = Tinv * (p - a[0]);
        if (l.minCoeff() <= 1e-9 || l.sum() >= 1.0 - 1e-9) continue;
        const auto fix = tdoa_solve(delays(a, p), a, centroid(a));
        CHECK((fix.position - p).norm() < 1e-6);
        CHECK(fix.iterations <= 20);
        ++points;
      }
  CHECK(points > 0);
  MESSAGE("interior grid points: " << points);
}

TEST_CASE("residual never exceeds the one at the initial guess") {
  const auto a = room_anchors();
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z(0.0, 0.3e-9);
  const Eigen::Vector3d p(4.0, 5.5, 2.0);
  for (int k = 0; k < 20; ++k) {
    auto beta = delays(a, p);
    for (auto& b : beta) b += z(rng);
    const Eigen::VectorXd g = centroid(a);
    double r0 = 0.0;
    const double d0 = (g - a[0]).norm();
    for (std::size_t i = 1; i < a.size(); ++i) {
      const double r = kSpeedOfLight * (beta[i] - beta[0]) - ((g - a[i]).norm() - d0);
      r0 += r * r;
    }
    CHECK(tdoa_solve(beta, a, g).residual <= std::sqrt(r0) + 1e-12);
  }
}

TEST_CASE("TDOA noise follows the linearized geometry") {
  const auto a = room_anchors();
  const Eigen::Vector3d p(4.5, 5.0, 1.2);
  const double sigma = 0.3e-9;
  // Linearized covariance of the difference measurements.
  const int m = static_cast<int>(a.size());
  Eigen::MatrixXd J(m - 1, 3);
  const Eigen::Vector3d u0 = (p - a[0]).normalized();
  for (int i = 1; i < m; ++i) J.row(i - 1) = ((p - a[static_cast<std::size_t>(i)]).normalized() - u0).transpose();
  Eigen::MatrixXd R = Eigen::MatrixXd::Constant(m - 1, m - 1, 1.0);
  R.diagonal().array() += 1.0;
  R *= std::pow(kSpeedOfLight * sigma, 2);
  const Eigen::MatrixXd Jp = (J.transpose() * J).inverse() * J.transpose();
  const double predicted = std::sqrt((Jp * R * Jp.transpose()).trace());

  std::mt19937_64 rng(17);
  std::normal_distribution<double> z(0.0, sigma);
  double acc = 0.0;
  const int trials = 1000;
  int ok = 0;
  for (int t = 0; t < trials; ++t) {
    auto beta = delays(a, p);
    for (auto& b : beta) b += z(rng);
    try {
      const auto fix = tdoa_solve(beta, a, centroid(a));
      acc += (fix.position - p).squaredNorm();
      ++ok;
    } catch (const SolverError&) {
    }
  }
  const double rmse_mc = std::sqrt(acc / ok);
  CHECK(ok > trials * 9 / 10);
  CHECK(rmse_mc < 2.0 * predicted);
  CHECK(rmse_mc > 0.5 * predicted);
}

TEST_CASE("degenerate geometry is reported") {
  const std::vector<Eigen::VectorXd> a{Eigen::Vector2d(0, 0), Eigen::Vector2d(2, 0), Eigen::Vector2d(2, 0)};
  const Eigen::Vector2d p(1.0, 1.0);
  CHECK_THROWS_AS(tdoa_solve(delays(a, p), a, Eigen::Vector2d(0.5, 0.5)), SolverError);
  CHECK_THROWS_AS(tdoa_solve({0.0, 0.0}, {a[0], a[1]}, Eigen::Vector2d(0.5, 0.5)), std::invalid_argument);
}

TEST_CASE("TOA ranging in 2D") {
  const std::vector<Eigen::VectorXd> a{Eigen::Vector2d(0, 3.6), Eigen::Vector2d(0, 0), Eigen::Vector2d(7.2, 1.8)};
  const Eigen::Vector2d p(2.1, 1.4);
  const auto fix = toa_solve(delays(a, p), a, Eigen::Vector2d(2.4, 1.8));
  CHECK((fix.position - p).norm() < 1e-6);
  const auto two = toa_solve(delays({a[0], a[2]}, p), {a[0], a[2]}, Eigen::Vector2d(2.4, 1.8));
  CHECK((two.position - p).norm() < 1e-6);
}

TEST_CASE("tracking with exact drift on a static agent") {
  FrameConfig cfg;
  const auto a = room_anchors();
  const Eigen::Vector3d p(4.2, 5.6, 1.9);
  const std::vector<double> drift{20e-6, 10e-6, 30e-6, 20e-6};
  const std::vector<double> offset{0.0, 31e-9, -12e-9, 7e-9};
  const double agent_offset = 250e-9;
  std::vector<std::vector<LinkObservation>> epochs;
  for (long e = 0; e < 10; ++e) {
    std::vector<LinkObservation> obs;
    const long k = 100 * e + 3;
    const int bit = static_cast<int>(e % 2);
    for (std::size_t m = 0; m < a.size(); ++m) {
      const double tau = (a[m] - p).norm() / kSpeedOfLight;
      const double toa = agent_offset + offset[m] + tau + (1 + drift[m]) * k * cfg.slot() + cfg.ppm_shift * bit;
      obs.push_back({k, toa, bit});
    }
    epochs.push_back(obs);
  }
  const auto fixes = track(epochs, drift, offset, cfg, a, centroid(a));
  REQUIRE(fixes.size() == 10);
  for (const auto& f : fixes) CHECK((f.position - p).norm() < 1e-6);
}

TEST_CASE("a drift error biases the track") {
  FrameConfig cfg;
  const auto a = room_anchors();
  const Eigen::Vector3d p(4.5, 5.0, 1.2);
  const std::vector<double> offset(4, 0.0);
  const long k = 10000;
  std::vector<LinkObservation> obs;
  for (std::size_t m = 0; m < a.size(); ++m)
    obs.push_back({k, (a[m] - p).norm() / kSpeedOfLight + (1 + (m == 1 ? 21e-6 : 20e-6)) * k * cfg.slot(), 0});
  const auto exact = track({obs}, {20e-6, 21e-6, 20e-6, 20e-6}, offset, cfg, a, centroid(a));
  CHECK((exact[0].position - p).norm() < 1e-6);
  const auto biased = track({obs}, {20e-6, 20e-6, 20e-6, 20e-6}, offset, cfg, a, centroid(a));
  // 1 ppm over 10^4 slots of 480 ns is 4.8 ns of timing error on one link.
  const double bias = (biased[0].position - p).norm();
  CHECK(bias > 0.5);
  CHECK(bias < 20.0);
}

TEST_CASE("anchor selection by confidence") {
  CHECK(select_anchors_by_confidence({0.9, 0.2, 0.8}, 2) == std::vector<std::size_t>{0, 2});
  CHECK(select_anchors_by_confidence({0.5, 0.5, 0.5}, 2) == std::vector<std::size_t>{0, 1});
  CHECK(select_anchors_by_confidence({0.1, 0.95, 0.3, 0.9}, 3) == std::vector<std::size_t>{1, 2, 3});
  CHECK_THROWS(select_anchors_by_confidence({0.5}, 2));
}

TEST_CASE("RMSE") {
  std::vector<Eigen::VectorXd> t{Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 2), Eigen::Vector2d(-3, 4)};
  CHECK(rmse(t, t) == 0.0);
  auto e = t;
  for (auto& v : e) v += Eigen::Vector2d(0.06, 0.08);
  CHECK(rmse(e, t) == doctest::Approx(0.1));
  CHECK_THROWS(rmse(e, {t[0]}));

  std::mt19937_64 rng(4);
  std::normal_distribution<double> z(0.0, 0.05);
  std::vector<Eigen::VectorXd> est, tru;
  for (int i = 0; i < 10000; ++i) {
    tru.push_back(Eigen::Vector2d(0, 0));
    est.push_back(Eigen::Vector2d(z(rng), z(rng)));
  }
  CHECK(rmse(est, tru) == doctest::Approx(0.05 * std::sqrt(2.0)).epsilon(0.03));
}
