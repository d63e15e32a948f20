#include "uwbicl/channel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "uwbicl/errors.hpp"

namespace uwbicl {

void ClockModel::validate() const {
  if (!std::isfinite(offset)) throw std::invalid_argument("clock offset must be finite");
  if (!(std::abs(drift) < 1e-3)) throw std::invalid_argument("clock drift must satisfy |drift| < 1e-3");
}

void Geometry::validate(int dimension) const {
  const std::size_t need = static_cast<std::size_t>(dimension) + 1;
  if (anchors.size() < need) throw std::invalid_argument("not enough anchors for the dimension");
  for (std::size_t i = 0; i < anchors.size(); ++i)
    for (std::size_t j = i + 1; j < anchors.size(); ++j)
      if ((anchors[i] - anchors[j]).norm() < 1e-9) throw std::invalid_argument("anchors must be distinct");
}

double Geometry::delay(std::size_t anchor) const { return propagation_delay(anchors.at(anchor), agent); }

void ChannelProfile::validate() const {
  if (!std::isfinite(attenuation)) throw std::invalid_argument("attenuation must be finite");
  if (taps.empty()) throw std::invalid_argument("channel needs at least one tap");
  for (std::size_t i = 0; i < taps.size(); ++i) {
    if (!std::isfinite(taps[i].gain) || !std::isfinite(taps[i].delay))
      throw std::invalid_argument("tap values must be finite");
    if (taps[i].delay < taps[0].delay) throw std::invalid_argument("first tap must be the earliest");
    if (multipath && taps[i].delay - taps[0].delay > delay_spread + 1e-15)
      throw ConfigViolation("tap delay exceeds the delay spread");
  }
}

double propagation_delay(const Eigen::Vector3d& r, const Eigen::Vector3d& p) {
  return (r - p).norm() / kSpeedOfLight;
}

double free_space_gain(const Eigen::Vector3d& r, const Eigen::Vector3d& p) {
  return 1.0 / std::max((r - p).norm(), 1.0);
}

std::vector<Tap> exponential_taps(double arrival_rate, double decay, double max_delay, Rng& rng) {
  std::vector<Tap> taps{Tap{0.0, 1.0}};
  std::exponential_distribution<double> gap(arrival_rate);
  std::normal_distribution<double> sign(0.0, 1.0);
  double t = gap(rng);
  while (t <= max_delay) {
    const double g = std::exp(-0.5 * t / decay) * (sign(rng) < 0.0 ? -1.0 : 1.0);
    taps.push_back({t, g});
    t += gap(rng);
  }
  double e = 0.0;
  for (const auto& tp : taps) e += tp.gain * tp.gain;
  for (auto& tp : taps) tp.gain /= std::sqrt(e);
  return taps;
}

std::vector<PulseEvent> warp_pulses(const std::vector<PulseEvent>& pulses, const ClockModel& clock,
                                    double tau, const ChannelProfile& profile) {
  clock.validate();
  profile.validate();
  const std::size_t ntaps = profile.multipath ? profile.taps.size() : 1;
  std::vector<PulseEvent> out;
  out.reserve(pulses.size() * ntaps);
  for (const auto& p : pulses) {
    const double t = clock.warp(p.epoch) + tau;
    for (std::size_t i = 0; i < ntaps; ++i) {
      const auto& tap = profile.taps[i];
      out.push_back({t + tap.delay, p.amplitude * profile.attenuation * tap.gain});
    }
  }
  return out;
}

SampledSignal apply_clock_and_channel(const TxFrame& tx, const Pulse& pulse, const ClockModel& clock,
                                      double tau, const ChannelProfile& profile,
                                      const TimeWindow& window) {
  const auto events = warp_pulses(tx.pulses, clock, tau, profile);
  for (const auto& e : events)
    if (e.epoch < window.start || e.epoch + pulse.duration() > window.end)
      throw ConfigViolation("warped pulse falls outside the simulation window");
  const double fs = tx.signal.sample_rate;
  SampledSignal out(fs, window.start, static_cast<std::size_t>(std::ceil(window.width() * fs)));
  render_pulses(out, pulse, events);
  return out;
}

void add_awgn(SampledSignal& sig, double variance, Rng& rng) {
  if (variance < 0.0) throw std::invalid_argument("noise variance must be >= 0");
  if (variance == 0.0) return;
  std::normal_distribution<double> n(0.0, std::sqrt(variance));
  for (double& v : sig.samples) v += n(rng);
}

SampledSignal superpose_rx(const std::vector<SampledSignal>& signals, double variance,
                           std::uint64_t seed) {
  if (signals.empty()) throw std::invalid_argument("superpose_rx needs at least one signal to fix the grid");
  SampledSignal out = signals.front();
  for (std::size_t i = 1; i < signals.size(); ++i) {
    const auto& s = signals[i];
    if (s.sample_rate != out.sample_rate) throw std::invalid_argument("sample rate mismatch");
    if (s.t0 != out.t0 || s.size() != out.size()) throw std::invalid_argument("time grid mismatch");
    for (std::size_t n = 0; n < out.size(); ++n) out.samples[n] += s.samples[n];
  }
  Rng rng(seed);
  add_awgn(out, variance, rng);
  return out;
}

double noise_variance_for(const FrameConfig& cfg, double ebn0_db) {
  const double eb = cfg.repetitions * cfg.pulse_energy;
  const double n0 = eb / std::pow(10.0, ebn0_db / 10.0);
  return 0.5 * n0 * cfg.sample_rate;
}

}  // namespace uwbicl
