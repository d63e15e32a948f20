#include <doctest.h>

#include <cmath>

#include "uwbicl/channel.hpp"
#include "uwbicl/network.hpp"
#include "uwbicl/sfd.hpp"

using namespace uwbicl;

namespace {

// Exhaustive enumeration of all 2^n success patterns.
double enumerate_pd2(double p, int n, int need) {
  double sum = 0.0;
  for (int mask = 0; mask < (1 << n); ++mask) {
    const int k = __builtin_popcount(static_cast<unsigned>(mask));
    if (k < need) continue;
    sum += std::pow(p, k) * std::pow(1.0 - p, n - k);
  }
  return sum;
}

}  // namespace

TEST_CASE("second-segment detection probability") {
  CHECK(analytic_pd2(1.0, 7, 0.1) == doctest::Approx(1.0));
  CHECK(analytic_pd2(0.0, 7, 0.1) == 0.0);
  CHECK(analytic_pd2(0.9, 7, 0.1) == doctest::Approx(0.850306).epsilon(1e-6));
  for (double p : {0.1, 0.5, 0.77, 0.95})
    for (int n : {3, 7, 10}) {
      FrameConfig c;
      c.sfd_symbols = n + 1;
      CHECK(analytic_pd2(p, n, 0.1) == doctest::Approx(enumerate_pd2(p, n, c.sfd_required())));
    }
}

TEST_CASE("second-segment probability is monotone") {
  double prev = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double v = analytic_pd2(i / 100.0, 7, 0.1);
    CHECK(v >= prev - 1e-15);
    prev = v;
  }
  // A larger error allowance lowers N_suc, which can only help.
  for (double p : {0.3, 0.8}) CHECK(analytic_pd2(p, 7, 0.3) >= analytic_pd2(p, 7, 0.1));
}

TEST_CASE("frame detection probability is a product") {
  CHECK(analytic_pfd(1.0, 0.37) == doctest::Approx(0.37));
  CHECK(analytic_pfd(0.9, 0.850306) == doctest::Approx(0.765275).epsilon(1e-6));
  CHECK(analytic_pfd(0.0, 0.5) == 0.0);
  CHECK_THROWS(analytic_pfd(1.2, 0.5));
}

TEST_CASE("noiseless SFD is acquired at the first symbol") {
  FrameConfig cfg;
  const Pulse p = gauss2_pulse(cfg.pulse_duration, cfg.sample_rate);
  const auto codes = anchor_codes(cfg, 7, 1, 16);
  for (double t0 : {130e-9, 251.37e-9}) {
    LinkState l;
    l.code = &codes[0];
    l.clock.offset = t0;
    l.bits.assign(10, 0);
    const auto g = frame_gains(cfg);
    l.gains.assign(g.begin(), g.begin() + 10);
    Rng rng(1);
    const auto rx = render_links(cfg, p, {l}, {0.0, 6e-6}, 0.0, rng);
    const auto templates = sfd_templates(cfg, p, codes[0]);
    const auto r = detect_sfd(rx, cfg, templates, 0.5, {0.0, 600e-9});
    REQUIRE(r.detected);
    CHECK(std::abs(*r.reference - t0) <= 1.0 / cfg.sample_rate);
    CHECK(r.tail_hits.size() == 7);
    for (bool h : r.tail_hits) CHECK(h);
  }
}

TEST_CASE("noise-only input rarely produces an SFD") {
  FrameConfig cfg;
  const Pulse p = gauss2_pulse(cfg.pulse_duration, cfg.sample_rate);
  const auto codes = anchor_codes(cfg, 7, 1, 8);
  const auto templates = sfd_templates(cfg, p, codes[0]);
  const double nv = noise_variance_for(cfg, 11.0);
  const double gamma = cfar_threshold(1e-3, templates[0], nv);
  int found = 0;
  int crossings = 0;
  for (int k = 0; k < 40; ++k) {
    Rng rng(100 + k);
    const auto rx = render_links(cfg, p, {}, {0.0, 5e-6}, nv, rng);
    const auto r = detect_sfd(rx, cfg, templates, gamma, {0.0, 1e-6});
    found += r.detected;
    crossings += r.crossings;
  }
  CHECK(found == 0);
  CHECK(crossings > 0);
}

TEST_CASE("energy split optimum sits slightly above an equal share") {
  FrameConfig cfg;
  const Pulse p = gauss2_pulse(cfg.pulse_duration, cfg.sample_rate);
  const double sa2 = sigma_a_sq(p, cfg.pri);
  std::vector<double> grid;
  for (int i = 0; i <= 22; ++i) grid.push_back(0.05 + 0.02 * i);
  grid.push_back(0.125);
  for (double ebn0 : {7.0, 9.0, 11.0}) {
    const auto link = link_budget(cfg, ebn0, 1e-3, sa2, 0);
    const auto s = sweep_energy_split(link, cfg, grid);
    std::size_t best = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (s[i].p_fd > s[best].p_fd) best = i;
    // Only the first symbol must be detected outright, so it gains from a
    // little more than 1/8 of the energy.
    CHECK(s[best].fraction >= 0.125);
    CHECK(s[best].fraction <= 0.19);
    CHECK(sfd_pfd(link, cfg, 0.999) < 0.01);
  }
  // Unimodal on the 0.02 grid at 11 dB.
  const auto link = link_budget(cfg, 11.0, 1e-3, sa2, 0);
  const auto s = sweep_energy_split(link, cfg, std::vector<double>(grid.begin(), grid.end() - 1));
  std::size_t k = 0;
  while (k + 1 < s.size() && s[k + 1].p_fd >= s[k].p_fd) ++k;
  for (std::size_t i = k; i + 1 < s.size(); ++i) CHECK(s[i + 1].p_fd <= s[i].p_fd);
}

TEST_CASE("ROC curves are monotone and ordered") {
  FrameConfig cfg;
  const Pulse p = gauss2_pulse(cfg.pulse_duration, cfg.sample_rate);
  const double sa2 = sigma_a_sq(p, cfg.pri);
  const std::vector<double> grid{1e-6, 1e-4, 1e-3, 1e-2, 0.1, 0.5, 1.0};
  const auto c = roc_points(cfg, sa2, {7, 9, 11}, {1, 3}, grid, 3);
  REQUIRE(c.size() == 6);
  for (const auto& curve : c) {
    for (std::size_t i = 1; i < grid.size(); ++i) CHECK(curve.p_fd[i] >= curve.p_fd[i - 1]);
    CHECK(curve.p_fd.back() == 1.0);
  }
  for (std::size_t g = 0; g + 1 < grid.size(); ++g) {
    CHECK(c[4].p_fd[g] >= c[3].p_fd[g]);
    CHECK(c[5].p_fd[g] >= c[4].p_fd[g]);
    CHECK(c[5].p_fd[g] >= c[2].p_fd[g]);
  }
}
