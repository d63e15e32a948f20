#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "uwbicl/signal.hpp"
#include "uwbicl/waveform.hpp"

namespace uwbicl {

// gamma_MF(T) for T = t0 + i / sample_rate.
struct MFOutput {
  double sample_rate = 0.0;
  double t0 = 0.0;
  std::vector<double> values;
  TimeWindow window;

  std::size_t size() const { return values.size(); }
  double time_at(std::size_t i) const { return t0 + static_cast<double>(i) / sample_rate; }
};

struct DetectionEvent {
  double toa = 0.0;   // refined pseudo-TOA, s
  double peak = 0.0;  // gamma_MF at the peak sample
  double threshold = 0.0;
  std::size_t symbol = 0;
};

struct Candidate {
  double toa = 0.0;
  double value = 0.0;
};

// Runs of nonzero template samples as (offset, length).
std::vector<std::pair<std::size_t, std::size_t>> template_support(const SampledSignal& tmpl);

MFOutput matched_filter(const SampledSignal& rx, const SampledSignal& tmpl, const TimeWindow& window);
MFOutput matched_filter_serial(const SampledSignal& rx, const SampledSignal& tmpl,
                               const TimeWindow& window);

double q_function(double x);
double q_inverse(double p);

// Decision variance of the MF output under noise plus Gaussian-modelled interference.
double mf_noise_variance(const SampledSignal& tmpl, double noise_var);
double cfar_threshold(double p_fa, const SampledSignal& tmpl, double noise_var,
                      double interference_var = 0.0);

// Sub-sample location of the vertex through three equally spaced samples.
double parabolic_offset(double left, double mid, double right);

std::optional<DetectionEvent> detect_symbol(const MFOutput& mf, double threshold, std::size_t symbol = 0);

// Local maxima with value >= floor, ordered by time.
std::vector<Candidate> local_maxima(const MFOutput& mf, double floor);

// Second moment of the pulse autocorrelation averaged over one PRI.
double sigma_a_sq(const Pulse& pulse, double pri);

// Gaussian-modelled interference variance at the MF output; `interferer_energies`
// holds the received per-pulse energy of every other transmitting anchor.
double interference_variance(int repetitions, double pulse_energy, double sigma_a2,
                             const std::vector<double>& interferer_energies);

struct LinkBudget {
  double p_fa = 1e-3;
  double alpha = 1.0;          // amplitude gain on the wanted link
  double template_energy = 0;  // N_r * E_tb
  double mf_noise_var = 0;     // sigma_MF^2
  double interference_var = 0;
};

double analytic_pd(const LinkBudget& link);
double analytic_pd(double p_fa, double alpha, const Pulse& pulse, const SampledSignal& tmpl,
                   double noise_var, int repetitions, const std::vector<double>& interferer_energies,
                   double pri);

}  // namespace uwbicl
