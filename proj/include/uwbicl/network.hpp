#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "uwbicl/channel.hpp"
#include "uwbicl/confidence.hpp"
#include "uwbicl/detection.hpp"
#include "uwbicl/rng.hpp"
#include "uwbicl/sfd.hpp"
#include "uwbicl/waveform.hpp"

namespace uwbicl {

// One anchor-to-agent link as seen on the agent's clock.
struct LinkState {
  const THCode* code = nullptr;
  ClockModel clock;
  double tau = 0.0;
  ChannelProfile profile;
  std::vector<int> bits;        // symbols first_symbol ...
  std::vector<double> gains;    // per symbol amplitude gain, empty = 1
  std::size_t first_symbol = 0;
};

std::vector<PulseEvent> link_pulses(const FrameConfig& cfg, const LinkState& link);

// Sums every link's warped pulse train on the grid of `window` and adds AWGN.
SampledSignal render_links(const FrameConfig& cfg, const Pulse& pulse, const std::vector<LinkState>& links,
                           const TimeWindow& window, double noise_var, Rng& rng);

// TH codes from distinct Gold seed pairs, one per anchor.
std::vector<THCode> anchor_codes(const FrameConfig& cfg, int register_length, std::size_t anchors,
                                 std::size_t symbols);

std::vector<SampledSignal> sfd_templates(const FrameConfig& cfg, const Pulse& pulse, const THCode& code);

struct ReceiverSetup {
  double threshold = 0.0;
  IntervalModel model;
  int resync_horizon = 8;
  double candidate_floor = 0.3;
  SFDOptions sfd;
};

// Candidate source for the symbols following an SFD acquired at t_sfd.
MFCandidateCache link_candidates(const SampledSignal& rx, const FrameConfig& cfg, const Pulse& pulse,
                                 const THCode& code, const ReceiverSetup& rs, double t_sfd);

DemodResult demod_link(MFCandidateCache& cache, const FrameConfig& cfg, const ReceiverSetup& rs,
                       double t_sfd, double c_thres);

struct BitTally {
  std::size_t errors = 0;
  std::size_t bits = 0;
};

// Payload bit errors; erasures and symbols lost to abandonment count as errors.
BitTally payload_errors(const DemodResult& res, const FrameConfig& cfg, const std::vector<int>& payload);

}  // namespace uwbicl
