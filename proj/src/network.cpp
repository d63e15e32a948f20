#include "uwbicl/network.hpp"

#include <cmath>
#include <stdexcept>

namespace uwbicl {

std::vector<PulseEvent> link_pulses(const FrameConfig& cfg, const LinkState& link) {
  if (link.code == nullptr) throw std::invalid_argument("link without TH code");
  const auto tx = pulse_schedule(cfg, *link.code, link.bits, link.gains, link.first_symbol);
  return warp_pulses(tx, link.clock, link.tau, link.profile);
}

SampledSignal render_links(const FrameConfig& cfg, const Pulse& pulse, const std::vector<LinkState>& links,
                           const TimeWindow& window, double noise_var, Rng& rng) {
  SampledSignal rx(cfg.sample_rate, window.start,
                   static_cast<std::size_t>(std::ceil(window.width() * cfg.sample_rate)));
  for (const auto& link : links) render_pulses(rx, pulse, link_pulses(cfg, link));
  add_awgn(rx, noise_var, rng);
  return rx;
}

std::vector<THCode> anchor_codes(const FrameConfig& cfg, int register_length, std::size_t anchors,
                                 std::size_t symbols) {
  std::vector<THCode> codes;
  const std::uint32_t mask = (1u << register_length) - 1u;
  for (std::size_t m = 0; m < anchors; ++m) {
    const auto s1 = static_cast<std::uint32_t>(1 + 7 * m) & mask;
    const auto s2 = static_cast<std::uint32_t>(mask - 3 * m) & mask;
    codes.push_back(gen_gold_code(register_length, {s1 ? s1 : 1u, s2 ? s2 : 1u},
                                  symbols * static_cast<std::size_t>(cfg.repetitions), cfg.chip_bits()));
  }
  return codes;
}

std::vector<SampledSignal> sfd_templates(const FrameConfig& cfg, const Pulse& pulse, const THCode& code) {
  std::vector<SampledSignal> t;
  for (int j = 0; j < cfg.sfd_symbols; ++j) t.push_back(synth_template(cfg, pulse, code, static_cast<std::size_t>(j)));
  return t;
}

MFCandidateCache link_candidates(const SampledSignal& rx, const FrameConfig& cfg, const Pulse& pulse,
                                 const THCode& code, const ReceiverSetup& rs, double t_sfd) {
  const double slot = cfg.slot();
  const double xi = rs.model.xi;
  // A window is centred on the reference plus whole slots, and the reference
  // itself may carry one PPM shift.
  auto nominal = [t_sfd, slot, xi](std::size_t j) { return t_sfd + slot * static_cast<double>(j) + 0.5 * xi; };
  const double half = 1.5 * xi + rs.model.tolerance + 2.0 / cfg.sample_rate;
  auto make = [&cfg, &pulse, &code](std::size_t j) { return synth_template(cfg, pulse, code, j); };
  return MFCandidateCache(rx, make, rs.candidate_floor * rs.threshold, nominal, half);
}

DemodResult demod_link(MFCandidateCache& cache, const FrameConfig& cfg, const ReceiverSetup& rs,
                       double t_sfd, double c_thres) {
  DemodParams p;
  p.threshold = rs.threshold;
  p.c_thres = c_thres;
  p.model = rs.model;
  p.resync_horizon = rs.resync_horizon;
  p.candidate_floor = rs.candidate_floor;
  const auto count = static_cast<std::size_t>(cfg.total_symbols() - 1);
  return demod_frame([&cache](std::size_t i, const TimeWindow& w) { return cache(i, w); },
                     Reference{t_sfd, 0, 0}, count, p);
}

BitTally payload_errors(const DemodResult& res, const FrameConfig& cfg, const std::vector<int>& payload) {
  BitTally t;
  t.bits = payload.size();
  const auto first = static_cast<std::size_t>(cfg.sfd_symbols);
  std::size_t seen = 0;
  for (const auto& s : res.symbols) {
    if (s.index < first) continue;
    const std::size_t k = s.index - first;
    if (k >= payload.size()) break;
    ++seen;
    if (!s.bit || *s.bit != payload[k]) ++t.errors;
  }
  t.errors += payload.size() - seen;
  return t;
}

}  // namespace uwbicl
