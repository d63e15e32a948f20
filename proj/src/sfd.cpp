#include "uwbicl/sfd.hpp"

#include <cmath>
#include <stdexcept>

namespace uwbicl {

namespace {

double binomial(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

}  // namespace

double analytic_pd2(double p_d, int tail_symbols, double p_e) {
  if (!(p_d >= 0.0 && p_d <= 1.0)) throw std::invalid_argument("p_d must lie in [0, 1]");
  if (tail_symbols < 1) throw std::invalid_argument("tail_symbols must be >= 1");
  if (!(p_e >= 0.0 && p_e < 1.0)) throw std::invalid_argument("p_e must lie in [0, 1)");
  const int need = static_cast<int>(std::floor(tail_symbols * (1.0 - p_e) + 1e-12));
  double sum = 0.0;
  for (int k = need; k <= tail_symbols; ++k)
    sum += binomial(tail_symbols, k) * std::pow(p_d, k) * std::pow(1.0 - p_d, tail_symbols - k);
  return std::min(sum, 1.0);
}

double analytic_pfd(double p_d_first, double p_d2) {
  if (!(p_d_first >= 0.0 && p_d_first <= 1.0 && p_d2 >= 0.0 && p_d2 <= 1.0))
    throw std::invalid_argument("probabilities must lie in [0, 1]");
  return p_d_first * p_d2;
}

SFDResult detect_sfd(const SampledSignal& rx, const FrameConfig& cfg,
                     const std::vector<SampledSignal>& templates, double threshold,
                     const TimeWindow& scan, const SFDOptions& opt) {
  const int tail = cfg.sfd_tail();
  if (templates.size() < static_cast<std::size_t>(cfg.sfd_symbols))
    throw std::invalid_argument("detect_sfd needs one template per SFD symbol");
  SFDResult res;
  const auto mf = matched_filter(rx, templates[0], scan);
  const double fs = rx.sample_rate;
  const auto lobe = static_cast<std::size_t>(std::lround(cfg.pulse_duration * fs));
  const double tol = opt.slot_tolerance / fs;
  const double rx_end = rx.end_time();
  std::size_t i = 0;
  while (i < mf.size()) {
    if (!(mf.values[i] > threshold)) {
      ++i;
      continue;
    }
    const std::size_t stop = std::min(mf.size(), i + lobe + 1);
    std::size_t p = i;
    for (std::size_t j = i + 1; j < stop; ++j)
      if (mf.values[j] > mf.values[p]) p = j;
    double frac = 0.0;
    if (p > 0 && p + 1 < mf.size()) frac = parabolic_offset(mf.values[p - 1], mf.values[p], mf.values[p + 1]);
    const double t = mf.time_at(p) + frac / fs;
    ++res.crossings;

    std::vector<bool> hits(static_cast<std::size_t>(tail), false);
    int ok = 0;
    for (int j = 1; j <= tail; ++j) {
      const double c = t + j * cfg.slot();
      if (c - tol >= rx_end) break;
      const auto m = matched_filter(rx, templates[static_cast<std::size_t>(j)], {c - tol, c + tol});
      for (double v : m.values)
        if (v > threshold) {
          hits[static_cast<std::size_t>(j - 1)] = true;
          ++ok;
          break;
        }
    }
    if (ok >= cfg.sfd_required()) {
      res.detected = true;
      res.reference = t;
      res.first_peak = mf.values[p];
      res.tail_hits = std::move(hits);
      return res;
    }
    i = stop;
  }
  return res;
}

SFDResult detect_sfd(const SampledSignal& rx, const FrameConfig& cfg, const Pulse& pulse,
                     const THCode& code, double threshold, const TimeWindow& scan,
                     const SFDOptions& opt) {
  std::vector<SampledSignal> templates;
  for (int j = 0; j < cfg.sfd_symbols; ++j)
    templates.push_back(synth_template(cfg, pulse, code, static_cast<std::size_t>(j)));
  return detect_sfd(rx, cfg, templates, threshold, scan, opt);
}

double sfd_pfd(const LinkBudget& link, const FrameConfig& cfg, double f) {
  if (!(f > 0.0 && f < 1.0)) throw std::invalid_argument("energy fraction must lie in (0, 1)");
  const double n = cfg.sfd_symbols;
  LinkBudget first = link;
  first.alpha = link.alpha * std::sqrt(f * n);
  LinkBudget rest = link;
  rest.alpha = link.alpha * std::sqrt((1.0 - f) * n / (n - 1.0));
  return analytic_pfd(analytic_pd(first),
                      analytic_pd2(analytic_pd(rest), cfg.sfd_tail(), cfg.max_sfd_error_rate));
}

std::vector<SplitPoint> sweep_energy_split(const LinkBudget& link, const FrameConfig& cfg,
                                           const std::vector<double>& fractions) {
  std::vector<SplitPoint> out;
  out.reserve(fractions.size());
  for (double f : fractions) out.push_back({f, sfd_pfd(link, cfg, f)});
  return out;
}

LinkBudget link_budget(const FrameConfig& cfg, double ebn0_db, double p_fa, double sigma_a2,
                       int interferers) {
  LinkBudget link;
  link.p_fa = p_fa;
  link.template_energy = cfg.repetitions * cfg.pulse_energy;
  const double n0 = link.template_energy / std::pow(10.0, ebn0_db / 10.0);
  link.mf_noise_var = 0.5 * n0 * link.template_energy;
  link.interference_var = interference_variance(
      cfg.repetitions, cfg.pulse_energy, sigma_a2,
      std::vector<double>(static_cast<std::size_t>(interferers), cfg.pulse_energy));
  return link;
}

std::vector<RocCurve> roc_points(const FrameConfig& cfg, double sigma_a2,
                                 const std::vector<double>& ebn0_db, const std::vector<int>& repetitions,
                                 const std::vector<double>& p_fa_grid, int interferers) {
  if (ebn0_db.empty() || repetitions.empty() || p_fa_grid.empty())
    throw std::invalid_argument("roc grids must be nonempty");
  std::vector<RocCurve> curves;
  for (int nr : repetitions) {
    FrameConfig c = cfg;
    c.repetitions = nr;
    for (double e : ebn0_db) {
      RocCurve curve{e, nr, {}, {}};
      for (double pfa : p_fa_grid) {
        double pfd = 1.0;
        if (pfa < 1.0) {
          const auto link = link_budget(c, e, pfa, sigma_a2, interferers);
          pfd = sfd_pfd(link, c, 1.0 / c.sfd_symbols);
        }
        curve.p_fa.push_back(pfa);
        curve.p_fd.push_back(pfd);
      }
      curves.push_back(std::move(curve));
    }
  }
  return curves;
}

}  // namespace uwbicl
