#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "uwbicl/signal.hpp"

namespace uwbicl {

// Energy-normalized second derivative of a Gaussian on [0, T_b).
class Pulse {
 public:
  Pulse(double duration, double sample_rate, double scale, double width);

  double duration() const { return duration_; }
  double sample_rate() const { return sample_rate_; }
  const std::vector<double>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }

  // Analytic value at time t after the pulse start; zero outside [0, T_b).
  double value_at(double t) const;
  double energy() const;
  double rms_bandwidth() const;

 private:
  double duration_;
  double sample_rate_;
  double scale_;
  double width_;
  std::vector<double> samples_;
};

Pulse gauss2_pulse(double duration, double sample_rate);

struct FrameConfig {
  double pri = 160e-9;             // T_f, s
  int repetitions = 3;             // N_r
  int payload_symbols = 64;        // N_f
  double ppm_shift = 45e-9;        // xi, s
  double chip_time = 4e-9;         // T_c, s
  double pulse_energy = 1.0;       // E_tb
  int sfd_symbols = 8;             // N_sf2 + 1
  double max_sfd_error_rate = 0.1; // P_e
  double first_symbol_energy_fraction = 0.125;
  double pulse_duration = 2e-9;    // T_b, s
  double delay_spread = 20e-9;     // t_spr, s
  double sample_rate = 10e9;       // f_s, Hz

  double slot() const { return pri * repetitions; }
  int sfd_tail() const { return sfd_symbols - 1; }
  int sfd_required() const;  // N_suc
  int total_symbols() const { return sfd_symbols + payload_symbols; }
  // Time available for TH shifts inside one PRI.
  double th_budget() const { return pri - ppm_shift - delay_spread - pulse_duration; }
  int chip_bits() const;
  int max_chip() const { return (1 << chip_bits()) - 1; }
  void validate() const;
};

struct THCode {
  std::vector<int> chips;
  std::size_t period = 0;

  int chip(std::size_t i) const { return chips[i % chips.size()]; }
  std::size_t size() const { return chips.size(); }
};

// Preferred LFSR pair (feedback tap masks) for an m-stage register, m in 5..12.
std::pair<std::uint32_t, std::uint32_t> gold_taps(int register_length);
std::vector<std::uint8_t> lfsr_sequence(int register_length, std::uint32_t taps, std::uint32_t state);
std::vector<std::uint8_t> gold_sequence(int register_length, std::uint32_t seed1, std::uint32_t seed2);

// Chips are read as consecutive bits_per_chip-wide blocks of the cyclic Gold
// sequence; bits_per_chip = 0 keeps the raw binary sequence.
THCode gen_gold_code(int register_length, std::pair<std::uint32_t, std::uint32_t> seeds,
                     std::size_t length, int bits_per_chip = 0);

// Pulse epochs of symbols first_symbol .. first_symbol + bits.size() - 1, with
// symbol k starting at k * slot. gains scale each symbol's amplitude on top of
// sqrt(E_tb); empty means unit gain.
std::vector<PulseEvent> pulse_schedule(const FrameConfig& cfg, const THCode& code,
                                       const std::vector<int>& bits,
                                       const std::vector<double>& gains = {},
                                       std::size_t first_symbol = 0);

// Amplitude gains for SFD + payload so that the first SFD symbol carries the
// configured share of the total SFD energy.
std::vector<double> frame_gains(const FrameConfig& cfg);
std::vector<int> frame_bits(const FrameConfig& cfg, const std::vector<int>& payload);

void render_pulses(SampledSignal& out, const Pulse& pulse, const std::vector<PulseEvent>& events);

struct TxFrame {
  std::vector<PulseEvent> pulses;
  SampledSignal signal;
};

TxFrame synth_tx(const FrameConfig& cfg, const Pulse& pulse, const THCode& code,
                 const std::vector<int>& bits, const std::vector<double>& gains = {});

SampledSignal synth_template(const FrameConfig& cfg, const Pulse& pulse, const THCode& code,
                             std::size_t symbol);

}  // namespace uwbicl
