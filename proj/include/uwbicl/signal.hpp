#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace uwbicl {

struct TimeWindow {
  double start = 0.0;
  double end = 0.0;

  double width() const { return end - start; }
  bool contains(double t) const { return t >= start && t <= end; }
};

// One rendered pulse: start time of the pulse support and its amplitude.
struct PulseEvent {
  double epoch = 0.0;
  double amplitude = 0.0;
};

// Uniformly sampled real waveform. Sample i sits at t0 + i / sample_rate.
struct SampledSignal {
  double sample_rate = 0.0;
  double t0 = 0.0;
  std::vector<double> samples;

  SampledSignal() = default;
  SampledSignal(double fs, double start, std::size_t n)
      : sample_rate(fs), t0(start), samples(n, 0.0) {}

  std::size_t size() const { return samples.size(); }
  double period() const { return 1.0 / sample_rate; }
  double time_at(std::size_t i) const { return t0 + static_cast<double>(i) / sample_rate; }
  double end_time() const { return time_at(samples.size()); }
  TimeWindow span() const { return {t0, end_time()}; }

  // Nearest sample index of time t; may fall outside [0, size).
  long index_of(double t) const { return std::lround((t - t0) * sample_rate); }

  // Discrete energy: sum of squares times the sample period.
  double energy() const {
    double acc = 0.0;
    for (double v : samples) acc += v * v;
    return acc / sample_rate;
  }
};

}  // namespace uwbicl
