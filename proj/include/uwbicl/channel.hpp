#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "uwbicl/rng.hpp"
#include "uwbicl/signal.hpp"
#include "uwbicl/waveform.hpp"

namespace uwbicl {

inline constexpr double kSpeedOfLight = 3e8;

// Local receive time of a pulse emitted at t: offset + (1 + drift) * t.
struct ClockModel {
  double offset = 0.0;  // s
  double drift = 0.0;   // dimensionless (20 ppm = 20e-6)

  void validate() const;
  double warp(double t) const { return offset + (1.0 + drift) * t; }
};

struct Geometry {
  std::vector<Eigen::Vector3d> anchors;
  Eigen::Vector3d agent = Eigen::Vector3d::Zero();

  void validate(int dimension) const;
  double delay(std::size_t anchor) const;
};

struct Tap {
  double delay = 0.0;  // s, relative to the LOS tap
  double gain = 1.0;
};

struct ChannelProfile {
  double attenuation = 1.0;
  std::vector<Tap> taps{Tap{}};
  bool multipath = false;  // false: only the first tap is used
  double delay_spread = 20e-9;

  void validate() const;
};

double propagation_delay(const Eigen::Vector3d& r, const Eigen::Vector3d& p);

// 1/d amplitude law referenced to 1 m.
double free_space_gain(const Eigen::Vector3d& r, const Eigen::Vector3d& p);

// Exponential power-delay taps with Poisson arrivals, capped at max_delay.
std::vector<Tap> exponential_taps(double arrival_rate, double decay, double max_delay, Rng& rng);

std::vector<PulseEvent> warp_pulses(const std::vector<PulseEvent>& pulses, const ClockModel& clock,
                                    double tau, const ChannelProfile& profile);

// Renders the warped pulse train on the sample grid of `window`.
SampledSignal apply_clock_and_channel(const TxFrame& tx, const Pulse& pulse, const ClockModel& clock,
                                      double tau, const ChannelProfile& profile,
                                      const TimeWindow& window);

void add_awgn(SampledSignal& sig, double variance, Rng& rng);

SampledSignal superpose_rx(const std::vector<SampledSignal>& signals, double variance,
                           std::uint64_t seed);

// Per-sample noise variance for a target Eb/N0 with E_b = N_r * E_tb.
double noise_variance_for(const FrameConfig& cfg, double ebn0_db);

}  // namespace uwbicl
