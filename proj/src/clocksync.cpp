#include "uwbicl/clocksync.hpp"

#include <cmath>
#include <stdexcept>

#include "uwbicl/errors.hpp"

namespace uwbicl {

std::vector<double> anchor_offsets(const std::vector<std::vector<double>>& measurements,
                                   const std::vector<double>& tau) {
  if (measurements.size() != tau.size()) throw std::invalid_argument("one delay per anchor required");
  std::vector<double> out(tau.size());
  for (std::size_t m = 0; m < tau.size(); ++m) {
    if (measurements[m].empty()) throw InsufficientData("anchor without offset measurements");
    double acc = 0.0;
    for (double t : measurements[m]) acc += t - tau[m];
    out[m] = acc / static_cast<double>(measurements[m].size());
  }
  return out;
}

double pseudo_delay(double toa, int bit, long index, const FrameConfig& cfg) {
  return toa - cfg.ppm_shift * bit - static_cast<double>(index) * cfg.slot();
}

namespace {

DriftEstimate solve(const std::vector<PseudoDelay>& s, const std::vector<double>& w, double slot) {
  if (s.size() < 2) throw InsufficientData("drift estimation needs at least two pseudo-delays");
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double x = static_cast<double>(s[i].index - s[i - 1].index) * slot;
    const double y = s[i].beta - s[i - 1].beta;
    sxx += w[i] * x * x;
    sxy += w[i] * x * y;
  }
  if (!(sxx > 0.0)) throw InsufficientData("singular drift design");
  DriftEstimate est;
  est.drift = sxy / sxx;
  est.count = s.size();
  double rss = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double x = static_cast<double>(s[i].index - s[i - 1].index) * slot;
    const double r = s[i].beta - s[i - 1].beta - est.drift * x;
    rss += r * r;
  }
  est.residual_rms = std::sqrt(rss / static_cast<double>(s.size() - 1));
  return est;
}

}  // namespace

DriftEstimate drift_ls(const std::vector<PseudoDelay>& series, double slot) {
  return solve(series, std::vector<double>(series.size(), 1.0), slot);
}

DriftEstimate drift_mwls(const std::vector<PseudoDelay>& series, const std::vector<double>& confidence,
                         double c_thres, double slot) {
  if (confidence.size() != series.size()) throw std::invalid_argument("one confidence per pseudo-delay");
  std::vector<PseudoDelay> kept;
  std::vector<double> w;
  for (std::size_t i = 0; i < series.size(); ++i)
    if (confidence[i] > c_thres) {
      kept.push_back(series[i]);
      w.push_back(confidence[i]);
    }
  if (kept.size() < 2) throw InsufficientData("fewer than two confident pseudo-delays");
  return solve(kept, w, slot);
}

}  // namespace uwbicl
