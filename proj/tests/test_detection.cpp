#include <doctest.h>

#include <cmath>
#include <random>

#include "uwbicl/channel.hpp"
#include "uwbicl/detection.hpp"
#include "uwbicl/network.hpp"

using namespace uwbicl;

namespace {

// Standard normal tail inverted by bisection on erfc.
double q_inv_bisect(double p) {
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (0.5 * std::erfc(mid / std::sqrt(2.0)) > p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

SampledSignal single_pulse_template(const Pulse& p, std::size_t len) {
  SampledSignal t(p.sample_rate(), 0.0, len);
  render_pulses(t, p, {{0.0, 1.0}});
  return t;
}

}  // namespace

TEST_CASE("Q inverse agrees with bisection") {
  for (double p : {1e-6, 1e-4, 1e-3, 0.01, 0.2, 0.5, 0.9}) CHECK(q_inverse(p) == doctest::Approx(q_inv_bisect(p)).epsilon(1e-9));
  CHECK(q_inverse(1e-3) == doctest::Approx(3.0902).epsilon(1e-4));
  CHECK(q_inverse(0.5) == doctest::Approx(0.0));
  CHECK(q_function(q_inverse(0.0123)) == doctest::Approx(0.0123));
  CHECK_THROWS(q_inverse(0.0));
  CHECK_THROWS(q_inverse(1.0));
}

TEST_CASE("CFAR threshold scaling") {
  const Pulse p = gauss2_pulse(2e-9, 10e9);
  const auto t = single_pulse_template(p, 40);
  CHECK(cfar_threshold(0.5, t, 3.0) == doctest::Approx(0.0));
  const double s2 = 2.0e9;
  const double e = t.energy();
  CHECK(cfar_threshold(1e-3, t, s2) == doctest::Approx(3.0902 * std::sqrt(e * s2 / 10e9)).epsilon(1e-4));
  CHECK(cfar_threshold(1e-3, t, 4.0 * s2) / cfar_threshold(1e-3, t, s2) == doctest::Approx(2.0));
  CHECK(cfar_threshold(1e-3, t, 2.0 * s2) / cfar_threshold(1e-3, t, s2) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("matched filter peaks at the pulse position with value alpha N_r E_tb") {
  FrameConfig cfg;
  const Pulse p = gauss2_pulse(cfg.pulse_duration, cfg.sample_rate);
  const auto codes = anchor_codes(cfg, 7, 1, 4);
  const auto tmpl = synth_template(cfg, p, codes[0], 2);
  for (double t0 : {100e-9, 100.03e-9, 100.07e-9}) {
    SampledSignal rx(cfg.sample_rate, 0.0, 7000);
    std::vector<PulseEvent> ev;
    for (int r = 0; r < 3; ++r) ev.push_back({t0 + r * cfg.pri + codes[0].chip(6 + r) * cfg.chip_time, 0.7});
    render_pulses(rx, p, ev);
    const auto mf = matched_filter(rx, tmpl, {80e-9, 120e-9});
    const auto d = detect_symbol(mf, 0.1);
    REQUIRE(d);
    CHECK(std::abs(d->toa - t0) <= 1.0 / cfg.sample_rate);
    CHECK(std::abs(d->toa - t0) < 0.2 / cfg.sample_rate);
    CHECK(d->peak == doctest::Approx(0.7 * 3.0).epsilon(0.03));
  }
}

TEST_CASE("parallel and serial matched filters agree") {
  FrameConfig cfg;
  const Pulse p = gauss2_pulse(cfg.pulse_duration, cfg.sample_rate);
  const auto codes = anchor_codes(cfg, 7, 1, 4);
  const auto tmpl = synth_template(cfg, p, codes[0], 1);
  SampledSignal rx(cfg.sample_rate, -3e-9, 40000);
  Rng rng(11);
  add_awgn(rx, 1.0, rng);
  for (const TimeWindow w : {TimeWindow{0.0, 3e-6}, TimeWindow{-3e-9, -1e-9}, TimeWindow{3.9e-6, 3.99e-6}}) {
    const auto a = matched_filter(rx, tmpl, w);
    const auto b = matched_filter_serial(rx, tmpl, w);
    REQUIRE(a.size() == b.size());
    CHECK(a.t0 == b.t0);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.values[i] == doctest::Approx(b.values[i]).epsilon(1e-12));
  }
  CHECK_THROWS(matched_filter(rx, tmpl, {1.0, 2.0}));
}

TEST_CASE("noise-only matched filter output is zero mean") {
  const Pulse p = gauss2_pulse(2e-9, 10e9);
  const auto t = single_pulse_template(p, 20);
  SampledSignal rx(10e9, 0.0, 400000);
  Rng rng(3);
  add_awgn(rx, 1e9, rng);
  const auto mf = matched_filter(rx, t, {0.0, 39.9e-6});
  double m = 0.0;
  for (double v : mf.values) m += v;
  m /= static_cast<double>(mf.size());
  CHECK(std::abs(m) < 5.0 * std::sqrt(mf_noise_variance(t, 1e9) * 20.0 / static_cast<double>(mf.size())));
}

TEST_CASE("detect_symbol decisions") {
  MFOutput mf;
  mf.sample_rate = 10e9;
  mf.values = {0.0, 0.3, 1.2, 0.3, 0.0};
  auto d = detect_symbol(mf, 1.0);
  REQUIRE(d);
  CHECK(d->toa == doctest::Approx(0.2e-9));
  mf.values = {0.0, 0.3, 0.8, 0.3, 0.0};
  CHECK_FALSE(detect_symbol(mf, 1.0));
  mf.values = {0.0, 1.5, 0.0, 0.0, 2.0, 0.0, 1.1};
  d = detect_symbol(mf, 1.0);
  REQUIRE(d);
  CHECK(d->peak == 2.0);
  CHECK(d->toa == doctest::Approx(0.4e-9));
  mf.values = {0.0, 2.0, 0.0, 0.0, 2.0, 0.0};
  d = detect_symbol(mf, 1.0);
  REQUIRE(d);
  CHECK(d->toa == doctest::Approx(0.1e-9));
}

TEST_CASE("two-pulse input: the larger peak is found by exhaustive scan") {
  const Pulse p = gauss2_pulse(2e-9, 10e9);
  const auto t = single_pulse_template(p, 20);
  SampledSignal rx(10e9, 0.0, 1000);
  render_pulses(rx, p, {{20e-9, 0.6}, {55e-9, 0.9}});
  const auto mf = matched_filter(rx, t, {0.0, 90e-9});
  std::size_t best = 0;
  for (std::size_t i = 0; i < mf.size(); ++i)
    if (mf.values[i] > mf.values[best]) best = i;
  const auto d = detect_symbol(mf, 0.1);
  REQUIRE(d);
  CHECK(std::abs(d->toa - mf.time_at(best)) <= 0.5e-10);
  CHECK(std::abs(d->toa - 55e-9) < 1e-10);
}

TEST_CASE("local maxima above a floor") {
  MFOutput mf;
  mf.sample_rate = 1.0;
  mf.values = {0.5, 0.1, 0.7, 0.7, 0.2, 0.05, 0.3, 0.9};
  const auto c = local_maxima(mf, 0.25);
  REQUIRE(c.size() == 3);
  CHECK(c[0].value == 0.5);
  CHECK(c[1].value == 0.7);
  CHECK(c[2].value == 0.9);
}

TEST_CASE("parabolic offset recovers the vertex of a parabola") {
  for (double x0 : {-0.4, -0.1, 0.0, 0.25, 0.45}) {
    auto f = [x0](double x) { return 3.0 - 2.0 * (x - x0) * (x - x0); };
    CHECK(parabolic_offset(f(-1), f(0), f(1)) == doctest::Approx(x0));
  }
  CHECK(parabolic_offset(1.0, 1.0, 1.0) == 0.0);
}

TEST_CASE("sigma_a^2 against 4x trapezoid quadrature") {
  const Pulse p = gauss2_pulse(2e-9, 10e9);
  const double pri = 160e-9;
  // Oracle: autocorrelation by the trapezoid rule on a 40 GHz grid.
  const double h = 0.25e-10;
  const int n = 80;
  std::vector<double> w(n + 1);
  for (int i = 0; i <= n; ++i) w[static_cast<std::size_t>(i)] = p.value_at(i * h);
  double acc = 0.0;
  for (int lag = -n; lag <= n; ++lag) {
    double r = 0.0;
    for (int i = 0; i <= n; ++i) {
      const int j = i + lag;
      if (j < 0 || j > n) continue;
      r += w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(j)];
    }
    r *= h;
    acc += r * r;
  }
  const double oracle = acc * h / pri;
  const double v = sigma_a_sq(p, pri);
  CHECK(v == doctest::Approx(oracle).epsilon(2e-3));
  CHECK(v == doctest::Approx(0.00257852).epsilon(1e-5));
  CHECK(v > 0.0);
  CHECK(v <= p.duration() / pri);
  CHECK(sigma_a_sq(p, 2 * pri) == doctest::Approx(0.5 * v));
}

TEST_CASE("analytic P_D limits") {
  LinkBudget l;
  l.template_energy = 3.0;
  l.mf_noise_var = 0.5;
  l.alpha = 0.0;
  CHECK(analytic_pd(l) == doctest::Approx(1e-3));
  l.alpha = 1e3;
  CHECK(analytic_pd(l) == doctest::Approx(1.0));
  // mu / sigma = Q^-1(P_FA) puts the threshold at the mean.
  l.alpha = q_inverse(1e-3) * std::sqrt(0.5) / 3.0;
  CHECK(analytic_pd(l) == doctest::Approx(0.5));
  l.interference_var = 0.5;
  CHECK(analytic_pd(l) < 0.5);
}

TEST_CASE("interference variance is linear in the interferer energies") {
  const double v = interference_variance(3, 1.0, 0.0025, {1.0, 1.0, 1.0});
  CHECK(v == doctest::Approx(3 * 0.0025 * 3));
  CHECK(interference_variance(3, 1.0, 0.0025, {}) == 0.0);
  CHECK(interference_variance(3, 2.0, 0.0025, {2.0}) == doctest::Approx(3 * 0.0025 * 4));
}

TEST_CASE("analytic P_D at mu = sigma Q^-1 matches matched-filter trials") {
  const Pulse p = gauss2_pulse(2e-9, 10e9);
  const auto t = single_pulse_template(p, 20);
  const double noise_var = 1e9;
  const double sd = std::sqrt(mf_noise_variance(t, noise_var));
  const double alpha = q_inverse(1e-3) * sd / t.energy();
  const double gamma = cfar_threshold(1e-3, t, noise_var);
  Rng rng(21);
  const int trials = 20000;
  int hits = 0;
  SampledSignal clean(10e9, 0.0, 20);
  render_pulses(clean, p, {{0.0, alpha}});
  std::normal_distribution<double> n(0.0, std::sqrt(noise_var));
  for (int k = 0; k < trials; ++k) {
    SampledSignal rx = clean;
    for (double& v : rx.samples) v += n(rng);
    hits += matched_filter(rx, t, {0.0, 0.0}).values[0] > gamma;
  }
  const double pd = static_cast<double>(hits) / trials;
  CHECK(std::abs(pd - 0.5) < 3.0 * std::sqrt(0.25 / trials));
}
