#include "uwbicl/waveform.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "uwbicl/errors.hpp"

namespace uwbicl {

namespace {

double gauss2_shape(double x) {
  const double a = 2.0 * std::numbers::pi * x * x;
  return (1.0 - 2.0 * a) * std::exp(-a);
}

}  // namespace

Pulse::Pulse(double duration, double sample_rate, double scale, double width)
    : duration_(duration), sample_rate_(sample_rate), scale_(scale), width_(width) {
  const auto n = static_cast<std::size_t>(std::lround(duration * sample_rate));
  samples_.resize(n);
  for (std::size_t i = 0; i < n; ++i) samples_[i] = value_at(static_cast<double>(i) / sample_rate);
}

double Pulse::value_at(double t) const {
  if (t < 0.0 || t >= duration_) return 0.0;
  return scale_ * gauss2_shape((t - 0.5 * duration_) / width_);
}

double Pulse::energy() const {
  double acc = 0.0;
  for (double v : samples_) acc += v * v;
  return acc / sample_rate_;
}

double Pulse::rms_bandwidth() const {
  // B^2 = int w'^2 / (4 pi^2 int w^2), evaluated on a fine grid.
  const int n = 20000;
  const double h = duration_ / n;
  double num = 0.0;
  double den = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = (i + 0.5) * h;
    const double d = (value_at(t + 0.5 * h) - value_at(t - 0.5 * h)) / h;
    const double v = value_at(t);
    num += d * d;
    den += v * v;
  }
  return std::sqrt(num / den) / (2.0 * std::numbers::pi);
}

Pulse gauss2_pulse(double duration, double sample_rate) {
  if (!(duration > 0.0)) throw std::invalid_argument("pulse duration must be positive");
  if (!(sample_rate > 0.0) || std::lround(duration * sample_rate) < 8)
    throw std::invalid_argument("pulse needs at least 8 samples");
  const double width = duration / 2.5;
  Pulse raw(duration, sample_rate, 1.0, width);
  return Pulse(duration, sample_rate, 1.0 / std::sqrt(raw.energy()), width);
}

int FrameConfig::sfd_required() const {
  return static_cast<int>(std::floor(sfd_tail() * (1.0 - max_sfd_error_rate) + 1e-12));
}

int FrameConfig::chip_bits() const {
  const double slots = th_budget() / chip_time + 1.0;
  if (slots < 2.0) return 0;
  return static_cast<int>(std::floor(std::log2(slots) + 1e-12));
}

void FrameConfig::validate() const {
  if (!(pri > 0.0)) throw ConfigViolation("pri must be positive");
  if (repetitions < 1) throw ConfigViolation("repetitions must be >= 1");
  if (payload_symbols < 0) throw ConfigViolation("payload_symbols must be >= 0");
  if (!(ppm_shift > 0.0)) throw ConfigViolation("ppm_shift must be positive");
  if (!(chip_time > 0.0)) throw ConfigViolation("chip_time must be positive");
  if (!(pulse_energy > 0.0)) throw ConfigViolation("pulse_energy must be positive");
  if (sfd_symbols < 2) throw ConfigViolation("sfd_symbols must be >= 2");
  if (!(max_sfd_error_rate > 0.0 && max_sfd_error_rate < 1.0))
    throw ConfigViolation("max_sfd_error_rate must lie in (0, 1)");
  if (!(first_symbol_energy_fraction > 0.0 && first_symbol_energy_fraction < 1.0))
    throw ConfigViolation("first_symbol_energy_fraction must lie in (0, 1)");
  if (!(pulse_duration > 0.0) || !(sample_rate > 0.0))
    throw ConfigViolation("pulse_duration and sample_rate must be positive");
  if (delay_spread < 0.0) throw ConfigViolation("delay_spread must be >= 0");
  if (th_budget() < 0.0)
    throw ConfigViolation("ppm_shift + delay_spread + pulse_duration exceeds the PRI");
  if (2.0 * ppm_shift >= slot()) throw ConfigViolation("ppm_shift too large for the symbol slot");
}

std::pair<std::uint32_t, std::uint32_t> gold_taps(int m) {
  switch (m) {
    case 5: return {0x5, 0xF};
    case 6: return {0x3, 0x1B};
    case 7: return {0x3, 0x9};
    case 8: return {0x1D, 0x2D};
    case 9: return {0x11, 0x1B};
    case 10: return {0x9, 0x6F};
    case 11: return {0x5, 0x2B};
    case 12: return {0x53, 0x51D};
    default: throw std::invalid_argument("register length must be in 5..12");
  }
}

std::vector<std::uint8_t> lfsr_sequence(int m, std::uint32_t taps, std::uint32_t state) {
  const std::uint32_t mask = (1u << m) - 1u;
  state &= mask;
  if (state == 0) throw std::invalid_argument("LFSR seed must be nonzero");
  const std::size_t period = (std::size_t{1} << m) - 1;
  std::vector<std::uint8_t> out(period);
  for (std::size_t i = 0; i < period; ++i) {
    out[i] = static_cast<std::uint8_t>(state & 1u);
    const std::uint32_t fb = std::popcount(state & taps) & 1u;
    state = (state >> 1) | (fb << (m - 1));
  }
  return out;
}

std::vector<std::uint8_t> gold_sequence(int m, std::uint32_t seed1, std::uint32_t seed2) {
  const auto [t1, t2] = gold_taps(m);
  auto a = lfsr_sequence(m, t1, seed1);
  const auto b = lfsr_sequence(m, t2, seed2);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] ^= b[i];
  return a;
}

THCode gen_gold_code(int m, std::pair<std::uint32_t, std::uint32_t> seeds, std::size_t length,
                     int bits_per_chip) {
  if (bits_per_chip < 0 || bits_per_chip > 16) throw std::invalid_argument("bits_per_chip out of range");
  const auto seq = gold_sequence(m, seeds.first, seeds.second);
  THCode code;
  code.chips.resize(length);
  const std::size_t width = bits_per_chip == 0 ? 1 : static_cast<std::size_t>(bits_per_chip);
  for (std::size_t i = 0; i < length; ++i) {
    int v = 0;
    for (std::size_t j = 0; j < width; ++j) v = (v << 1) | seq[(i * width + j) % seq.size()];
    code.chips[i] = v;
  }
  code.period = seq.size();
  return code;
}

std::vector<PulseEvent> pulse_schedule(const FrameConfig& cfg, const THCode& code,
                                       const std::vector<int>& bits,
                                       const std::vector<double>& gains, std::size_t first_symbol) {
  const auto nr = static_cast<std::size_t>(cfg.repetitions);
  if (code.size() < (first_symbol + bits.size()) * nr) throw std::invalid_argument("TH code shorter than the frame");
  if (!gains.empty() && gains.size() != bits.size())
    throw std::invalid_argument("gain count differs from symbol count");
  const double amp = std::sqrt(cfg.pulse_energy);
  std::vector<PulseEvent> events;
  events.reserve(bits.size() * nr);
  for (std::size_t k = 0; k < bits.size(); ++k) {
    if (bits[k] != 0 && bits[k] != 1) throw std::invalid_argument("bits must be 0 or 1");
    const double g = gains.empty() ? 1.0 : gains[k];
    for (std::size_t r = 0; r < nr; ++r) {
      const std::size_t idx = (first_symbol + k) * nr + r;
      const double th = code.chip(idx) * cfg.chip_time;
      if (th > cfg.th_budget() + 1e-15)
        throw ConfigViolation("TH shift " + std::to_string(th) + " s exceeds the PRI budget");
      events.push_back({static_cast<double>(idx) * cfg.pri + th + cfg.ppm_shift * bits[k], amp * g});
    }
  }
  return events;
}

std::vector<double> frame_gains(const FrameConfig& cfg) {
  const double n = cfg.sfd_symbols;
  const double f = cfg.first_symbol_energy_fraction;
  std::vector<double> g(static_cast<std::size_t>(cfg.total_symbols()), 1.0);
  g[0] = std::sqrt(f * n);
  for (int j = 1; j < cfg.sfd_symbols; ++j) g[static_cast<std::size_t>(j)] = std::sqrt((1.0 - f) * n / (n - 1.0));
  return g;
}

std::vector<int> frame_bits(const FrameConfig& cfg, const std::vector<int>& payload) {
  std::vector<int> bits(static_cast<std::size_t>(cfg.sfd_symbols), 0);
  bits.insert(bits.end(), payload.begin(), payload.end());
  return bits;
}

void render_pulses(SampledSignal& out, const Pulse& pulse, const std::vector<PulseEvent>& events) {
  const double fs = out.sample_rate;
  const long n_out = static_cast<long>(out.size());
  const long width = static_cast<long>(pulse.size()) + 1;
  for (const auto& ev : events) {
    double u = (ev.epoch - out.t0) * fs;
    const double r = std::round(u);
    if (std::abs(u - r) < 1e-7) u = r;
    const long n0 = static_cast<long>(std::ceil(u));
    if (n0 + width < 0 || n0 >= n_out) continue;
    if (u == r) {
      const auto& s = pulse.samples();
      for (long i = 0; i < static_cast<long>(s.size()); ++i) {
        const long n = n0 + i;
        if (n >= 0 && n < n_out) out.samples[static_cast<std::size_t>(n)] += ev.amplitude * s[static_cast<std::size_t>(i)];
      }
    } else {
      for (long n = std::max(n0, 0L); n < std::min(n0 + width, n_out); ++n)
        out.samples[static_cast<std::size_t>(n)] += ev.amplitude * pulse.value_at((n - u) / fs);
    }
  }
}

TxFrame synth_tx(const FrameConfig& cfg, const Pulse& pulse, const THCode& code,
                 const std::vector<int>& bits, const std::vector<double>& gains) {
  TxFrame tx;
  tx.pulses = pulse_schedule(cfg, code, bits, gains);
  const auto n = static_cast<std::size_t>(std::lround(bits.size() * cfg.slot() * cfg.sample_rate));
  tx.signal = SampledSignal(cfg.sample_rate, 0.0, n);
  render_pulses(tx.signal, pulse, tx.pulses);
  return tx;
}

SampledSignal synth_template(const FrameConfig& cfg, const Pulse& pulse, const THCode& code,
                             std::size_t symbol) {
  const auto nr = static_cast<std::size_t>(cfg.repetitions);
  if ((symbol + 1) * nr > code.size()) throw std::out_of_range("symbol index beyond TH code");
  const auto n = static_cast<std::size_t>(std::lround(cfg.slot() * cfg.sample_rate));
  SampledSignal tmpl(cfg.sample_rate, 0.0, n);
  std::vector<PulseEvent> events;
  const double amp = std::sqrt(cfg.pulse_energy);
  for (std::size_t r = 0; r < nr; ++r)
    events.push_back({static_cast<double>(r) * cfg.pri + code.chip(symbol * nr + r) * cfg.chip_time, amp});
  render_pulses(tmpl, pulse, events);
  return tmpl;
}

}  // namespace uwbicl
