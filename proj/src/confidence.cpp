#include "uwbicl/confidence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace uwbicl {

IntervalModel IntervalModel::from(const FrameConfig& cfg, double sigma) {
  return {cfg.slot(), cfg.ppm_shift, 0.5 * cfg.ppm_shift, sigma};
}

double IntervalModel::mean(int q_ref, int q, int skip) const {
  return slot * (1 + skip) + xi * (q - q_ref);
}

void IntervalModel::validate() const {
  if (!(slot > 0.0 && xi > 0.0 && tolerance > 0.0 && sigma > 0.0))
    throw std::invalid_argument("interval model values must be positive");
  if (2.0 * tolerance > xi + 1e-18) throw std::invalid_argument("interval tolerance overlaps hypotheses");
}

double sii_sigma(double rms_bandwidth, double ebn0_db) {
  const double snr = std::pow(10.0, ebn0_db / 10.0);
  const double b = rms_bandwidth;
  return std::sqrt(2.0 / (8.0 * std::numbers::pi * std::numbers::pi * b * b * snr));
}

double sai(double peak, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("threshold must be positive");
  if (peak >= threshold) return 1.0;
  return std::max(peak, 0.0) / threshold;
}

double sii(double dt, int q_ref, int skip, const IntervalModel& model) {
  const double s2 = 2.0 * model.sigma * model.sigma;
  const double d0 = dt - model.mean(q_ref, 0, skip);
  const double d1 = dt - model.mean(q_ref, 1, skip);
  return std::min(1.0, std::exp(-d0 * d0 / s2) + std::exp(-d1 * d1 / s2));
}

double unified(double s, double l) { return s * l; }

std::optional<int> demod_step(double dt, int q_ref, int skip, const IntervalModel& model) {
  const double e = model.tolerance;
  // mean(q_ref, q) only ever yields u00/u01 for q_ref = 0 and u10/u11 for q_ref = 1.
  for (int q : {0, 1}) {
    const double u = model.mean(q_ref, q, skip);
    if (dt > u - e && dt <= u + e) return q;
  }
  return std::nullopt;
}

TimeWindow search_window(const Reference& ref, std::size_t index, const IntervalModel& model) {
  const double c = ref.toa + model.slot * static_cast<double>(index - ref.index);
  const double half = model.xi + model.tolerance;
  return {c - half, c + half};
}

DemodResult demod_frame(const CandidateSource& source, const Reference& start, std::size_t count,
                        const DemodParams& params) {
  if (!(params.c_thres >= 0.0 && params.c_thres < 1.0)) throw std::invalid_argument("c_thres must lie in [0, 1)");
  DemodResult out;
  out.symbols.reserve(count);
  Reference ref = start;
  const double floor = params.candidate_floor * params.threshold;
  for (std::size_t n = 1; n <= count; ++n) {
    const std::size_t idx = start.index + n;
    SymbolEstimate est;
    est.index = idx;
    est.skip = static_cast<int>(idx - ref.index - 1);
    const auto window = search_window(ref, idx, params.model);
    const auto cands = source(idx, window);
    double best_c = -1.0;
    for (const auto& cand : cands) {
      if (cand.value < floor) continue;
      const double dt = cand.toa - ref.toa;
      Confidence cf;
      cf.s = sai(cand.value, params.threshold);
      cf.l = sii(dt, ref.bit, est.skip, params.model);
      cf.c = unified(cf.s, cf.l);
      if (cf.c > best_c) {
        best_c = cf.c;
        est.toa = cand.toa;
        est.conf = cf;
        est.detected = true;
      }
    }
    if (est.detected) {
      est.bit = demod_step(est.toa - ref.toa, ref.bit, est.skip, params.model);
      est.conf.is_reference = est.conf.c > params.c_thres && est.bit.has_value();
    }
    out.symbols.push_back(est);
    out.processed = n;
    if (est.conf.is_reference) {
      ref = {est.toa, *est.bit, idx};
    } else if (static_cast<int>(idx - ref.index) >= params.resync_horizon) {
      out.abandoned = n < count;
      break;
    }
  }
  return out;
}

MFCandidateCache::MFCandidateCache(const SampledSignal& rx,
                                   std::function<SampledSignal(std::size_t)> make_template, double floor,
                                   std::function<double(std::size_t)> nominal, double half_span)
    : rx_(rx),
      make_template_(std::move(make_template)),
      floor_(floor),
      nominal_(std::move(nominal)),
      half_span_(half_span) {}

const SampledSignal& MFCandidateCache::tmpl(std::size_t index) {
  if (templates_.size() <= index) templates_.resize(index + 1);
  if (!templates_[index]) templates_[index] = make_template_(index);
  return *templates_[index];
}

std::vector<Candidate> MFCandidateCache::operator()(std::size_t index, const TimeWindow& window) {
  const TimeWindow span = rx_.span();
  TimeWindow w{std::max(window.start, span.start), std::min(window.end, span.end - rx_.period())};
  if (w.end <= w.start) return {};
  if (cache_.size() <= index) cache_.resize(index + 1);
  if (!cache_[index]) {
    const double c = nominal_(index);
    TimeWindow full{std::max(c - half_span_, span.start), std::min(c + half_span_, span.end - rx_.period())};
    if (full.end > full.start) cache_[index] = matched_filter(rx_, tmpl(index), full);
  }
  MFOutput slice;
  const auto& cached = cache_[index];
  const double fs = rx_.sample_rate;
  if (cached && w.start >= cached->time_at(0) - 0.5 / fs &&
      w.end <= cached->time_at(cached->size() - 1) + 0.5 / fs) {
    const auto a = static_cast<std::size_t>(std::ceil((w.start - cached->t0) * fs - 1e-9));
    const auto b = static_cast<std::size_t>(std::floor((w.end - cached->t0) * fs + 1e-9));
    slice.sample_rate = fs;
    slice.t0 = cached->time_at(a);
    slice.window = w;
    slice.values.assign(cached->values.begin() + static_cast<long>(a),
                        cached->values.begin() + static_cast<long>(std::min(b, cached->size() - 1)) + 1);
  } else {
    slice = matched_filter(rx_, tmpl(index), w);
  }
  return local_maxima(slice, floor_);
}

}  // namespace uwbicl
