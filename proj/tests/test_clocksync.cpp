#include <doctest.h>

#include <cmath>
#include <random>

#include "uwbicl/clocksync.hpp"
#include "uwbicl/errors.hpp"

using namespace uwbicl;

namespace {

constexpr double kSlot = 480e-9;

std::vector<PseudoDelay> line(double beta0, double drift, int n, double sigma = 0.0, unsigned seed = 1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, sigma > 0 ? sigma : 1.0);
  std::vector<PseudoDelay> s;
  for (int k = 0; k < n; ++k) s.push_back({k, beta0 + drift * k * kSlot + (sigma > 0 ? z(rng) : 0.0)});
  return s;
}

// Slope through the origin of the consecutive differences, written out.
double diff_slope(const std::vector<PseudoDelay>& s, const std::vector<double>& w) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double x = (s[i].index - s[i - 1].index) * kSlot;
    num += w[i] * x * (s[i].beta - s[i - 1].beta);
    den += w[i] * x * x;
  }
  return num / den;
}

}  // namespace

TEST_CASE("anchor offsets") {
  const std::vector<double> tau{10e-9, 20e-9, 30e-9};
  auto off = anchor_offsets({{10e-9}, {20e-9, 20e-9}, {30e-9}}, tau);
  for (double o : off) CHECK(o == doctest::Approx(0.0));
  off = anchor_offsets({{17e-9}, {27e-9}, {37e-9, 37e-9}}, tau);
  for (double o : off) CHECK(o == doctest::Approx(7e-9));
  CHECK_THROWS_AS(anchor_offsets({{1.0}, {}, {1.0}}, tau), InsufficientData);
}

TEST_CASE("anchor offset error shrinks as 1/sqrt(N)") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z(0.0, 0.1e-9);
  double acc = 0.0;
  const int runs = 400;
  for (int r = 0; r < runs; ++r) {
    std::vector<double> t;
    for (int i = 0; i < 100; ++i) t.push_back(5e-9 + 3e-9 + z(rng));
    const double e = anchor_offsets({t}, {5e-9})[0] - 3e-9;
    acc += e * e;
  }
  const double rms = std::sqrt(acc / runs);
  CHECK(rms == doctest::Approx(0.01e-9).epsilon(0.15));
}

TEST_CASE("offset residual is orthogonal to the design") {
  const std::vector<double> t{1.0e-9, 1.4e-9, 0.7e-9, 1.1e-9};
  const double off = anchor_offsets({t}, {0.2e-9})[0];
  double sum = 0.0;
  for (double v : t) sum += v - off - 0.2e-9;
  CHECK(std::abs(sum) < 1e-24);
}

TEST_CASE("pseudo-delay") {
  FrameConfig cfg;
  for (long k : {0L, 1L, 17L, 400L})
    for (int q : {0, 1}) {
      const double t = k * cfg.slot() + 45e-9 * q + 50e-9;
      CHECK(pseudo_delay(t, q, k, cfg) == doctest::Approx(50e-9).epsilon(1e-9));
      CHECK(pseudo_delay(t, 1 - q, k, cfg) - 50e-9 == doctest::Approx(q ? 45e-9 : -45e-9));
    }
  const double eps = 20e-6;
  const long k = 300;
  const double t0 = 50e-9;
  const double tk = t0 + (1 + eps) * k * cfg.slot();
  CHECK(pseudo_delay(tk, 0, k, cfg) - pseudo_delay(t0, 0, 0, cfg) == doctest::Approx(eps * k * cfg.slot()));
}

TEST_CASE("LS drift on exact and two-point data") {
  const auto s = line(30e-9, 20e-6, 50);
  const auto e = drift_ls(s, kSlot);
  CHECK(e.drift == doctest::Approx(20e-6).epsilon(1e-9));
  CHECK(e.count == 50);
  const std::vector<PseudoDelay> two{{3, 1e-9}, {10, 1e-9 + 5e-12}};
  CHECK(drift_ls(two, kSlot).drift == doctest::Approx(5e-12 / (7 * kSlot)));
  CHECK_THROWS_AS(drift_ls({{1, 0.0}}, kSlot), InsufficientData);
  CHECK_THROWS_AS(drift_ls({{1, 0.0}, {1, 1e-9}}, kSlot), InsufficientData);
}

TEST_CASE("LS drift error falls with series length") {
  auto rmse = [](int n) {
    double acc = 0.0;
    for (unsigned r = 0; r < 300; ++r) {
      const double e = drift_ls(line(0.0, 10e-6, n, 30e-12, 1000 + r), kSlot).drift - 10e-6;
      acc += e * e;
    }
    return std::sqrt(acc / 300);
  };
  const double a = rmse(50), b = rmse(200), c = rmse(800);
  CHECK(b < a);
  CHECK(c < b);
}

TEST_CASE("MWLS with unit weights equals LS") {
  const auto s = line(1e-9, 30e-6, 64, 40e-12, 9);
  const std::vector<double> c(s.size(), 1.0);
  CHECK(drift_mwls(s, c, 0.9, kSlot).drift == doctest::Approx(drift_ls(s, kSlot).drift).epsilon(1e-12));
}

TEST_CASE("MWLS with binary weights equals LS on the kept subset") {
  const auto s = line(1e-9, 30e-6, 200, 40e-12, 4);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> c;
  std::vector<PseudoDelay> kept;
  for (const auto& p : s) {
    const bool keep = u(rng) < 0.7;
    c.push_back(keep ? 1.0 : 0.2);
    if (keep) kept.push_back(p);
  }
  const double a = drift_mwls(s, c, 0.9, kSlot).drift;
  const double b = drift_ls(kept, kSlot).drift;
  CHECK(std::abs(a - b) <= 1e-12 * std::abs(b));
  CHECK(drift_mwls(s, c, 0.9, kSlot).count == kept.size());
}

TEST_CASE("MWLS matches a weighted consecutive-difference slope") {
  const auto s = line(0.0, 20e-6, 40, 30e-12, 6);
  std::vector<double> c;
  for (std::size_t i = 0; i < s.size(); ++i) c.push_back(0.91 + 0.002 * static_cast<double>(i % 40));
  CHECK(drift_mwls(s, c, 0.9, kSlot).drift == doctest::Approx(diff_slope(s, c)).epsilon(1e-12));
}

TEST_CASE("a low-confidence bit error does not move MWLS") {
  auto s = line(0.0, 20e-6, 100);
  std::vector<double> c(s.size(), 1.0);
  s[99].beta += 45e-9;
  c[99] = 0.1;
  CHECK(drift_mwls(s, c, 0.9, kSlot).drift == doctest::Approx(20e-6).epsilon(1e-9));
  CHECK(std::abs(drift_ls(s, kSlot).drift - 20e-6) > 1e-6);
  CHECK_THROWS_AS(drift_mwls(s, std::vector<double>(s.size(), 0.5), 0.9, kSlot), InsufficientData);
}

TEST_CASE("drift-compensated pseudo-delays have no slope left") {
  const auto s = line(7e-9, 25e-6, 300, 30e-12, 12);
  const auto e = drift_ls(s, kSlot);
  std::vector<PseudoDelay> comp;
  for (const auto& p : s) comp.push_back({p.index, p.beta - e.drift * p.index * kSlot});
  CHECK(std::abs(drift_ls(comp, kSlot).drift) < 1e-15);
}
