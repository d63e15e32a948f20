#pragma once

#include <vector>

#include "uwbicl/waveform.hpp"

namespace uwbicl {

struct PseudoDelay {
  long index = 0;    // symbol index kappa
  double beta = 0.0; // s
};

struct DriftEstimate {
  double drift = 0.0;         // dimensionless
  double residual_rms = 0.0;  // s
  std::size_t count = 0;      // pseudo-delays used
};

// Per-anchor closed-form LLS: mean of (t_b - tau_b). measurements[m] holds
// the receive times of anchor m, tau[m] its known propagation delay.
std::vector<double> anchor_offsets(const std::vector<std::vector<double>>& measurements,
                                   const std::vector<double>& tau);

double pseudo_delay(double toa, int bit, long index, const FrameConfig& cfg);

DriftEstimate drift_ls(const std::vector<PseudoDelay>& series, double slot);

// Weights are the confidences above c_thres; others are dropped and the
// consecutive differences span the gaps.
DriftEstimate drift_mwls(const std::vector<PseudoDelay>& series, const std::vector<double>& confidence,
                         double c_thres, double slot);

}  // namespace uwbicl
