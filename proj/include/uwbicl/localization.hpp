#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "uwbicl/waveform.hpp"

namespace uwbicl {

struct PositionFix {
  Eigen::VectorXd position;
  double residual = 0.0;  // m
  std::vector<std::size_t> anchors;
  int iterations = 0;
};

struct SolverOptions {
  int max_iterations = 50;
  double tolerance = 1e-10;  // step norm, m
};

// Pseudo-delays are referenced to anchors[0]; all anchor vectors share the
// dimension of the initial guess.
PositionFix tdoa_solve(const std::vector<double>& beta, const std::vector<Eigen::VectorXd>& anchors,
                       const Eigen::VectorXd& guess, const SolverOptions& opt = {});

// Absolute ranging: beta are offset-free one-way delays.
PositionFix toa_solve(const std::vector<double>& beta, const std::vector<Eigen::VectorXd>& anchors,
                      const Eigen::VectorXd& guess, const SolverOptions& opt = {});

Eigen::VectorXd centroid(const std::vector<Eigen::VectorXd>& anchors);

struct LinkObservation {
  long index = 0;  // symbol index
  double toa = 0.0;
  int bit = 0;
};

// epochs[e][m]: observation of anchor m at epoch e. Pseudo-delays are
// drift-compensated, corrected by the calibrated anchor offsets and solved
// with a warm start from the previous fix.
std::vector<PositionFix> track(const std::vector<std::vector<LinkObservation>>& epochs,
                               const std::vector<double>& drift, const std::vector<double>& anchor_offset,
                               const FrameConfig& cfg, const std::vector<Eigen::VectorXd>& anchors,
                               const Eigen::VectorXd& guess);

// Indices (ascending) of the k links with the highest confidence; ties go to
// the lower index.
std::vector<std::size_t> select_anchors_by_confidence(const std::vector<double>& confidence, std::size_t k);

double rmse(const std::vector<Eigen::VectorXd>& estimates, const std::vector<Eigen::VectorXd>& truths);

}  // namespace uwbicl
