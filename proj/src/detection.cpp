#include "uwbicl/detection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

namespace uwbicl {

std::vector<std::pair<std::size_t, std::size_t>> template_support(const SampledSignal& tmpl) {
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  std::size_t i = 0;
  const std::size_t n = tmpl.size();
  while (i < n) {
    if (tmpl.samples[i] == 0.0) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && tmpl.samples[j] != 0.0) ++j;
    runs.emplace_back(i, j - i);
    i = j;
  }
  return runs;
}

namespace {

struct MFPlan {
  long first = 0;  // rx index of the first candidate
  std::size_t count = 0;
};

MFPlan plan_mf(const SampledSignal& rx, const SampledSignal& tmpl, const TimeWindow& window) {
  if (rx.sample_rate != tmpl.sample_rate) throw std::invalid_argument("matched filter: sample rate mismatch");
  if (!(window.end >= window.start)) throw std::invalid_argument("matched filter: empty window");
  const double fs = rx.sample_rate;
  const long a = static_cast<long>(std::ceil((window.start - rx.t0) * fs - 1e-9));
  const long b = static_cast<long>(std::floor((window.end - rx.t0) * fs + 1e-9));
  if (b < a) throw std::invalid_argument("matched filter: window contains no sample");
  if (b < 0 || a >= static_cast<long>(rx.size()))
    throw std::invalid_argument("matched filter: window outside the received signal");
  return {a, static_cast<std::size_t>(b - a + 1)};
}

inline double mf_at(const SampledSignal& rx, const SampledSignal& tmpl,
                    const std::vector<std::pair<std::size_t, std::size_t>>& runs, long n) {
  const long nrx = static_cast<long>(rx.size());
  const double* x = rx.samples.data();
  const double* h = tmpl.samples.data();
  double acc = 0.0;
  for (const auto& [off, len] : runs) {
    long lo = n + static_cast<long>(off);
    long hi = lo + static_cast<long>(len);
    std::size_t k = off;
    if (lo < 0) {
      k += static_cast<std::size_t>(-lo);
      lo = 0;
    }
    hi = std::min(hi, nrx);
    for (long m = lo; m < hi; ++m, ++k) acc += x[m] * h[k];
  }
  return acc;
}

MFOutput make_output(const SampledSignal& rx, const TimeWindow& window, const MFPlan& plan) {
  MFOutput out;
  out.sample_rate = rx.sample_rate;
  out.t0 = rx.time_at(0) + static_cast<double>(plan.first) / rx.sample_rate;
  out.window = window;
  out.values.resize(plan.count);
  return out;
}

}  // namespace

MFOutput matched_filter(const SampledSignal& rx, const SampledSignal& tmpl, const TimeWindow& window) {
  const auto plan = plan_mf(rx, tmpl, window);
  const auto runs = template_support(tmpl);
  auto out = make_output(rx, window, plan);
  const double scale = 1.0 / rx.sample_rate;
  const long count = static_cast<long>(plan.count);
#pragma omp parallel for schedule(static) if (count > 8192)
  for (long i = 0; i < count; ++i)
    out.values[static_cast<std::size_t>(i)] = scale * mf_at(rx, tmpl, runs, plan.first + i);
  return out;
}

MFOutput matched_filter_serial(const SampledSignal& rx, const SampledSignal& tmpl,
                               const TimeWindow& window) {
  const auto plan = plan_mf(rx, tmpl, window);
  auto out = make_output(rx, window, plan);
  const long nrx = static_cast<long>(rx.size());
  for (std::size_t i = 0; i < plan.count; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < tmpl.size(); ++k) {
      const long m = plan.first + static_cast<long>(i) + static_cast<long>(k);
      if (m >= 0 && m < nrx) acc += rx.samples[static_cast<std::size_t>(m)] * tmpl.samples[k];
    }
    out.values[i] = acc / rx.sample_rate;
  }
  return out;
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double q_inverse(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("probability must lie in (0, 1)");
  return boost::math::quantile(boost::math::complement(boost::math::normal_distribution<double>(), p));
}

double mf_noise_variance(const SampledSignal& tmpl, double noise_var) {
  double e = 0.0;
  for (double v : tmpl.samples) e += v * v;
  return noise_var * e / (tmpl.sample_rate * tmpl.sample_rate);
}

double cfar_threshold(double p_fa, const SampledSignal& tmpl, double noise_var, double interference_var) {
  if (noise_var < 0.0 || interference_var < 0.0) throw std::invalid_argument("variance must be >= 0");
  return q_inverse(p_fa) * std::sqrt(mf_noise_variance(tmpl, noise_var) + interference_var);
}

double parabolic_offset(double l, double m, double r) {
  const double den = l - 2.0 * m + r;
  if (den >= 0.0) return 0.0;
  return std::clamp(0.5 * (l - r) / den, -0.5, 0.5);
}

std::optional<DetectionEvent> detect_symbol(const MFOutput& mf, double threshold, std::size_t symbol) {
  if (mf.values.empty()) return std::nullopt;
  std::size_t best = 0;
  for (std::size_t i = 1; i < mf.size(); ++i)
    if (mf.values[i] > mf.values[best]) best = i;
  if (!(mf.values[best] > threshold)) return std::nullopt;
  double frac = 0.0;
  if (best > 0 && best + 1 < mf.size())
    frac = parabolic_offset(mf.values[best - 1], mf.values[best], mf.values[best + 1]);
  return DetectionEvent{mf.time_at(best) + frac / mf.sample_rate, mf.values[best], threshold, symbol};
}

std::vector<Candidate> local_maxima(const MFOutput& mf, double floor) {
  std::vector<Candidate> out;
  const std::size_t n = mf.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double v = mf.values[i];
    if (v < floor) continue;
    const bool left_ok = i == 0 || v >= mf.values[i - 1];
    const bool right_ok = i + 1 == n || v > mf.values[i + 1];
    if (!left_ok || !right_ok) continue;
    double frac = 0.0;
    if (i > 0 && i + 1 < n) frac = parabolic_offset(mf.values[i - 1], v, mf.values[i + 1]);
    out.push_back({mf.time_at(i) + frac / mf.sample_rate, v});
  }
  return out;
}

double sigma_a_sq(const Pulse& pulse, double pri) {
  if (!(pri > 0.0)) throw std::invalid_argument("pri must be positive");
  const int over = 8;
  const double h = 1.0 / (pulse.sample_rate() * over);
  const auto n = static_cast<long>(std::ceil(pulse.duration() / h));
  std::vector<double> w(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = pulse.value_at((i + 0.5) * h);
  double acc = 0.0;
  for (long lag = -(n - 1); lag <= n - 1; ++lag) {
    double r = 0.0;
    for (long i = std::max(0L, -lag); i < std::min(n, n - lag); ++i)
      r += w[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i + lag)];
    r *= h;
    acc += r * r;
  }
  return acc * h / pri;
}

double interference_variance(int repetitions, double pulse_energy, double sigma_a2,
                             const std::vector<double>& interferer_energies) {
  double sum = 0.0;
  for (double a : interferer_energies) sum += a;
  return repetitions * sigma_a2 * pulse_energy * sum;
}

double analytic_pd(const LinkBudget& link) {
  if (!(link.p_fa > 0.0 && link.p_fa < 1.0)) throw std::invalid_argument("probability must lie in (0, 1)");
  const double sd = std::sqrt(link.mf_noise_var + link.interference_var);
  const double mu = link.alpha * link.template_energy;
  if (sd == 0.0) return mu > 0.0 ? 1.0 : link.p_fa;
  return q_function(q_inverse(link.p_fa) - mu / sd);
}

double analytic_pd(double p_fa, double alpha, const Pulse& pulse, const SampledSignal& tmpl,
                   double noise_var, int repetitions, const std::vector<double>& interferer_energies,
                   double pri) {
  LinkBudget link;
  link.p_fa = p_fa;
  link.alpha = alpha;
  double e = 0.0;
  for (double v : tmpl.samples) e += v * v;
  link.template_energy = e / tmpl.sample_rate;
  link.mf_noise_var = mf_noise_variance(tmpl, noise_var);
  link.interference_var = interference_variance(repetitions, link.template_energy / repetitions,
                                                sigma_a_sq(pulse, pri), interferer_energies);
  return analytic_pd(link);
}

}  // namespace uwbicl
