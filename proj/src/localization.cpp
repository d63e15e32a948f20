#include "uwbicl/localization.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "uwbicl/channel.hpp"
#include "uwbicl/clocksync.hpp"
#include "uwbicl/errors.hpp"

namespace uwbicl {

namespace {

using Residual = void (*)(const std::vector<double>&, const std::vector<Eigen::VectorXd>&,
                          const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::MatrixXd&);

void tdoa_residual(const std::vector<double>& beta, const std::vector<Eigen::VectorXd>& a,
                   const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& J) {
  const auto m = static_cast<Eigen::Index>(a.size());
  r.resize(m - 1);
  J.resize(m - 1, p.size());
  const Eigen::VectorXd u0 = p - a[0];
  const double d0 = std::max(u0.norm(), 1e-12);
  for (Eigen::Index i = 1; i < m; ++i) {
    const Eigen::VectorXd ui = p - a[static_cast<std::size_t>(i)];
    const double di = std::max(ui.norm(), 1e-12);
    r(i - 1) = kSpeedOfLight * (beta[static_cast<std::size_t>(i)] - beta[0]) - (di - d0);
    J.row(i - 1) = -(ui / di - u0 / d0).transpose();
  }
}

void toa_residual(const std::vector<double>& beta, const std::vector<Eigen::VectorXd>& a,
                  const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& J) {
  const auto m = static_cast<Eigen::Index>(a.size());
  r.resize(m);
  J.resize(m, p.size());
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::VectorXd ui = p - a[static_cast<std::size_t>(i)];
    const double di = std::max(ui.norm(), 1e-12);
    r(i) = kSpeedOfLight * beta[static_cast<std::size_t>(i)] - di;
    J.row(i) = -(ui / di).transpose();
  }
}

PositionFix levenberg(Residual f, std::size_t min_anchors, const std::vector<double>& beta,
                      const std::vector<Eigen::VectorXd>& anchors, const Eigen::VectorXd& guess,
                      const SolverOptions& opt) {
  if (beta.size() != anchors.size()) throw std::invalid_argument("one pseudo-delay per anchor required");
  if (anchors.size() < min_anchors) throw std::invalid_argument("not enough anchors for the dimension");
  for (const auto& a : anchors)
    if (a.size() != guess.size()) throw std::invalid_argument("anchor and guess dimensions differ");
  Eigen::VectorXd p = guess;
  Eigen::VectorXd r;
  Eigen::MatrixXd J;
  f(beta, anchors, p, r, J);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  PositionFix fix;
  bool converged = false;
  int it = 0;
  for (; it < opt.max_iterations && !converged; ++it) {
    const Eigen::MatrixXd H = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    bool accepted = false;
    for (int tries = 0; tries < 30 && !accepted; ++tries) {
      Eigen::MatrixXd A = H;
      A.diagonal() += lambda * (H.diagonal().array() + 1e-12).matrix();
      const Eigen::VectorXd step = A.ldlt().solve(-g);
      const Eigen::VectorXd trial = p + step;
      Eigen::VectorXd r2;
      Eigen::MatrixXd J2;
      f(beta, anchors, trial, r2, J2);
      const double c2 = r2.squaredNorm();
      if (c2 <= cost) {
        accepted = true;
        converged = step.norm() < opt.tolerance || cost - c2 <= 1e-30;
        p = trial;
        r = r2;
        J = J2;
        cost = c2;
        lambda = std::max(lambda * 0.1, 1e-12);
      } else {
        lambda *= 10.0;
      }
    }
    if (!accepted) converged = true;  // no descent direction left
  }
  if (!converged) throw SolverError("position solver did not converge");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
  const auto& sv = svd.singularValues();
  if (sv.size() < guess.size() || sv(sv.size() - 1) < 1e-9 * std::max(sv(0), 1e-300))
    throw SolverError("degenerate anchor geometry");
  fix.position = p;
  fix.residual = std::sqrt(cost);
  fix.anchors.resize(anchors.size());
  std::iota(fix.anchors.begin(), fix.anchors.end(), std::size_t{0});
  fix.iterations = it;
  return fix;
}

}  // namespace

PositionFix tdoa_solve(const std::vector<double>& beta, const std::vector<Eigen::VectorXd>& anchors,
                       const Eigen::VectorXd& guess, const SolverOptions& opt) {
  return levenberg(tdoa_residual, static_cast<std::size_t>(guess.size()) + 1, beta, anchors, guess, opt);
}

PositionFix toa_solve(const std::vector<double>& beta, const std::vector<Eigen::VectorXd>& anchors,
                      const Eigen::VectorXd& guess, const SolverOptions& opt) {
  return levenberg(toa_residual, static_cast<std::size_t>(guess.size()), beta, anchors, guess, opt);
}

Eigen::VectorXd centroid(const std::vector<Eigen::VectorXd>& anchors) {
  if (anchors.empty()) throw std::invalid_argument("no anchors");
  Eigen::VectorXd c = Eigen::VectorXd::Zero(anchors[0].size());
  for (const auto& a : anchors) c += a;
  return c / static_cast<double>(anchors.size());
}

std::vector<PositionFix> track(const std::vector<std::vector<LinkObservation>>& epochs,
                               const std::vector<double>& drift, const std::vector<double>& anchor_offset,
                               const FrameConfig& cfg, const std::vector<Eigen::VectorXd>& anchors,
                               const Eigen::VectorXd& guess) {
  if (drift.size() != anchors.size() || anchor_offset.size() != anchors.size())
    throw std::invalid_argument("one drift and offset per anchor required");
  std::vector<PositionFix> fixes;
  Eigen::VectorXd p = guess;
  for (const auto& obs : epochs) {
    if (obs.size() != anchors.size()) throw std::invalid_argument("one observation per anchor required");
    std::vector<double> beta(obs.size());
    for (std::size_t m = 0; m < obs.size(); ++m) {
      const auto& o = obs[m];
      beta[m] = pseudo_delay(o.toa, o.bit, o.index, cfg) - drift[m] * static_cast<double>(o.index) * cfg.slot() -
                anchor_offset[m];
    }
    auto fix = tdoa_solve(beta, anchors, p);
    p = fix.position;
    fixes.push_back(std::move(fix));
  }
  return fixes;
}

std::vector<std::size_t> select_anchors_by_confidence(const std::vector<double>& confidence, std::size_t k) {
  if (k > confidence.size()) throw std::invalid_argument("k exceeds the number of anchors");
  std::vector<std::size_t> idx(confidence.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return confidence[a] > confidence[b]; });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

double rmse(const std::vector<Eigen::VectorXd>& estimates, const std::vector<Eigen::VectorXd>& truths) {
  if (estimates.size() != truths.size()) throw std::invalid_argument("length mismatch");
  if (estimates.empty()) throw std::invalid_argument("empty sequences");
  double acc = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) acc += (estimates[i] - truths[i]).squaredNorm();
  return std::sqrt(acc / static_cast<double>(estimates.size()));
}

}  // namespace uwbicl
