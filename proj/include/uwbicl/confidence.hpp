#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "uwbicl/detection.hpp"
#include "uwbicl/signal.hpp"
#include "uwbicl/waveform.hpp"

namespace uwbicl {

struct Confidence {
  double s = 0.0;  // amplitude part
  double l = 0.0;  // interval part
  double c = 0.0;
  bool is_reference = false;
};

// Interval hypotheses between adjacent symbols: u00 = u11 = slot,
// u01 = slot + xi, u10 = slot - xi.
struct IntervalModel {
  double slot = 480e-9;
  double xi = 45e-9;
  double tolerance = 22.5e-9;  // e
  double sigma = 0.0;          // sigma_dt

  static IntervalModel from(const FrameConfig& cfg, double sigma);
  double mean(int q_ref, int q, int skip) const;
  void validate() const;
};

// sigma_dt^2 = 2 / (8 pi^2 B^2 SNR) with SNR = N_r E_tb / N0 = Eb/N0.
double sii_sigma(double rms_bandwidth, double ebn0_db);

double sai(double peak, double threshold);
double sii(double dt, int q_ref, int skip, const IntervalModel& model);
double unified(double s, double l);

std::optional<int> demod_step(double dt, int q_ref, int skip, const IntervalModel& model);

struct SymbolEstimate {
  std::size_t index = 0;
  double toa = 0.0;
  std::optional<int> bit;
  Confidence conf;
  int skip = 0;
  bool detected = false;  // a candidate existed in the search window
};

struct Reference {
  double toa = 0.0;
  int bit = 0;
  std::size_t index = 0;
};

struct DemodParams {
  double threshold = 0.0;     // gamma
  double c_thres = 0.9;
  IntervalModel model;
  int resync_horizon = 8;     // consecutive non-reference symbols tolerated
  double candidate_floor = 0.3;  // fraction of gamma
};

struct DemodResult {
  std::vector<SymbolEstimate> symbols;
  bool abandoned = false;
  std::size_t processed = 0;  // symbols handled before abandonment
};

// Returns candidates (time-ordered) of symbol `index` inside `window`.
using CandidateSource = std::function<std::vector<Candidate>(std::size_t index, const TimeWindow& window)>;

TimeWindow search_window(const Reference& ref, std::size_t index, const IntervalModel& model);

DemodResult demod_frame(const CandidateSource& source, const Reference& start, std::size_t count,
                        const DemodParams& params);

// Candidate source backed by one received waveform and per-symbol templates.
// MF output is computed once per symbol around its nominal position and reused
// across calls, so several thresholds can share one received frame.
class MFCandidateCache {
 public:
  MFCandidateCache(const SampledSignal& rx, std::function<SampledSignal(std::size_t)> make_template,
                   double floor, std::function<double(std::size_t)> nominal, double half_span);

  std::vector<Candidate> operator()(std::size_t index, const TimeWindow& window);

 private:
  const SampledSignal& rx_;
  std::function<SampledSignal(std::size_t)> make_template_;
  double floor_;
  std::function<double(std::size_t)> nominal_;
  double half_span_;
  std::vector<std::optional<MFOutput>> cache_;
  std::vector<std::optional<SampledSignal>> templates_;

  const SampledSignal& tmpl(std::size_t index);
};

}  // namespace uwbicl
