#pragma once

#include <optional>
#include <vector>

#include "uwbicl/detection.hpp"
#include "uwbicl/signal.hpp"
#include "uwbicl/waveform.hpp"

namespace uwbicl {

struct SFDResult {
  bool detected = false;
  std::optional<double> reference;  // t_{-1}, pseudo-TOA of the first SFD symbol
  double first_peak = 0.0;
  std::vector<bool> tail_hits;      // one flag per second-segment symbol
  int crossings = 0;                // first-symbol crossings examined
};

struct SFDOptions {
  int slot_tolerance = 2;  // samples around each expected second-segment position
};

double analytic_pd2(double p_d, int tail_symbols, double p_e);
double analytic_pfd(double p_d_first, double p_d2);

// templates[j] is the template of SFD symbol j (at least sfd_symbols entries).
SFDResult detect_sfd(const SampledSignal& rx, const FrameConfig& cfg,
                     const std::vector<SampledSignal>& templates, double threshold,
                     const TimeWindow& scan, const SFDOptions& opt = {});
SFDResult detect_sfd(const SampledSignal& rx, const FrameConfig& cfg, const Pulse& pulse,
                     const THCode& code, double threshold, const TimeWindow& scan,
                     const SFDOptions& opt = {});

// Per-symbol link model at nominal gain; alpha is overridden per segment.
double sfd_pfd(const LinkBudget& link, const FrameConfig& cfg, double first_fraction);

struct SplitPoint {
  double fraction = 0.0;
  double p_fd = 0.0;
};

std::vector<SplitPoint> sweep_energy_split(const LinkBudget& link, const FrameConfig& cfg,
                                           const std::vector<double>& fractions);

struct RocCurve {
  double ebn0_db = 0.0;
  int repetitions = 1;
  std::vector<double> p_fa;
  std::vector<double> p_fd;
};

LinkBudget link_budget(const FrameConfig& cfg, double ebn0_db, double p_fa, double sigma_a2,
                       int interferers);

std::vector<RocCurve> roc_points(const FrameConfig& cfg, double sigma_a2,
                                 const std::vector<double>& ebn0_db, const std::vector<int>& repetitions,
                                 const std::vector<double>& p_fa_grid, int interferers = 0);

}  // namespace uwbicl
