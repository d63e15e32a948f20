#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>

#include "common.hpp"
#include "uwbicl/channel.hpp"
#include "uwbicl/clocksync.hpp"
#include "uwbicl/confidence.hpp"
#include "uwbicl/errors.hpp"
#include "uwbicl/localization.hpp"
#include "uwbicl/network.hpp"
#include "uwbicl/rng.hpp"
#include "uwbicl/sfd.hpp"

namespace uwbicl {

using detail::Mean;
using detail::prop_se;
using detail::Rms;
using detail::row;

namespace {

// Calibrated clock of one link: local receive time of symbol k is
// offset + (1 + drift) * k * slot + tau.
struct LinkClock {
  bool valid = false;
  double offset = 0.0;
  double drift = 0.0;
};

struct TrackScene {
  const ScenarioConfig* sc = nullptr;
  FrameConfig cfg;
  Pulse pulse;
  std::vector<int> anchors;  // indices into track.anchors
  bool with_blockage = false;
  std::vector<THCode> codes;
  double noise_var = 0.0;
  ReceiverSetup rs;

  TrackScene(const ScenarioConfig& s, const std::vector<int>& ids, bool blockage)
      : sc(&s), cfg(s.frame), pulse(gauss2_pulse(s.frame.pulse_duration, s.frame.sample_rate)), anchors(ids), with_blockage(blockage) {
    const auto& t = s.track;
    cfg.repetitions = t.repetitions;
    cfg.payload_symbols = t.static_symbols - cfg.sfd_symbols;
    cfg.validate();
    const auto symbols = static_cast<std::size_t>(t.static_symbols + t.epochs * t.epoch_spacing + t.burst_symbols);
    codes = anchor_codes(cfg, s.network.gold_register_length, t.anchors.size(), symbols);
    noise_var = noise_variance_for(cfg, t.ebn0_db);
    const double sa2 = sigma_a_sq(pulse, cfg.pri);
    const double vi = interference_variance(cfg.repetitions, cfg.pulse_energy, sa2,
                                            std::vector<double>(ids.size() - 1, cfg.pulse_energy));
    rs.threshold = cfar_threshold(s.receiver.p_fa, synth_template(cfg, pulse, codes[0], 0), noise_var, vi);
    rs.model = IntervalModel::from(cfg, s.receiver.sii_sigma_scale * sii_sigma(pulse.rms_bandwidth(), t.ebn0_db));
    rs.resync_horizon = s.receiver.resync_horizon;
    rs.candidate_floor = s.receiver.candidate_floor;
    rs.sfd.slot_tolerance = s.receiver.slot_tolerance;
  }

  Eigen::Vector2d path(int epoch) const {
    const auto& t = sc->track;
    const double th = 2.0 * std::numbers::pi * epoch / t.epochs;
    return t.path_center + Eigen::Vector2d(t.path_radii.x() * std::cos(th), t.path_radii.y() * std::sin(th));
  }

  Eigen::Vector3d anchor(std::size_t i) const { return sc->track.anchors[static_cast<std::size_t>(anchors[i])]; }

  bool blocked(std::size_t i, int epoch) const {
    const auto& t = sc->track;
    if (!with_blockage || anchors[i] != t.blocked_anchor) return false;
    const long a = std::lround(t.blocked_start * t.epochs);
    const long b = std::lround((t.blocked_start + t.blocked_fraction) * t.epochs);
    return epoch >= a && epoch < b;
  }

  std::size_t burst_start(int epoch) const {
    const auto& t = sc->track;
    return static_cast<std::size_t>(t.static_symbols + epoch * t.epoch_spacing);
  }
};

Eigen::Vector3d lift(const Eigen::Vector2d& p) { return {p.x(), p.y(), 0.0}; }

// Static phase at the known start point: SFD, chained demodulation, MWLS
// drift, then the offset that makes the known range consistent.
std::vector<LinkClock> calibrate(const TrackScene& ts, const std::vector<ClockModel>& clocks, Rng& rng) {
  const auto& cfg = ts.cfg;
  const auto& net = ts.sc->network;
  const std::size_t n = ts.anchors.size();
  const Eigen::Vector3d p0 = lift(ts.path(0));
  std::bernoulli_distribution bit(0.5);
  std::vector<LinkState> links;
  std::vector<double> tau(n);
  double max_tau = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    LinkState l;
    l.code = &ts.codes[static_cast<std::size_t>(ts.anchors[i])];
    l.clock = clocks[i];
    tau[i] = propagation_delay(ts.anchor(i), p0);
    l.tau = tau[i];
    max_tau = std::max(max_tau, tau[i]);
    std::vector<int> payload(static_cast<std::size_t>(cfg.payload_symbols));
    for (auto& b : payload) b = bit(rng) ? 1 : 0;
    l.bits = frame_bits(cfg, payload);
    l.gains = frame_gains(cfg);
    links.push_back(std::move(l));
  }
  const double lead = 2.0 * net.max_offset + max_tau;
  const TimeWindow win{0.0, lead + (cfg.total_symbols() + 1) * cfg.slot() * (1.0 + 1e-3)};
  const auto rx = render_links(cfg, ts.pulse, links, win, ts.noise_var, rng);
  const double c_thres = ts.sc->track.c_thres;
  std::vector<LinkClock> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& code = *links[i].code;
    const auto sfd = detect_sfd(rx, cfg, ts.pulse, code, ts.rs.threshold, {0.0, lead + cfg.pulse_duration}, ts.rs.sfd);
    if (!sfd.detected) continue;
    const double t_sfd = *sfd.reference;
    auto cache = link_candidates(rx, cfg, ts.pulse, code, ts.rs, t_sfd);
    const auto res = demod_link(cache, cfg, ts.rs, t_sfd, c_thres);
    std::vector<PseudoDelay> pd{{0, pseudo_delay(t_sfd, 0, 0, cfg)}};
    std::vector<double> conf{1.0};
    for (const auto& e : res.symbols)
      if (e.detected && e.bit) {
        const long k = static_cast<long>(e.index);
        pd.push_back({k, pseudo_delay(e.toa, *e.bit, k, cfg)});
        conf.push_back(e.conf.c);
      }
    LinkClock lc;
    try {
      lc.drift = drift_mwls(pd, conf, c_thres, cfg.slot()).drift;
    } catch (const InsufficientData&) {
      continue;
    }
    Mean off;
    for (std::size_t k = 0; k < pd.size(); ++k)
      if (conf[k] > c_thres) off.add(pd[k].beta - lc.drift * static_cast<double>(pd[k].index) * cfg.slot());
    lc.offset = off.mean() - tau[i];
    lc.valid = true;
    out[i] = lc;
  }
  return out;
}

struct LinkReading {
  std::optional<double> tau;  // s
  double confidence = 0.0;    // mean C over the burst
};

LinkReading read_link(const TrackScene& ts, const SampledSignal& rx, std::size_t i, const LinkClock& lc,
                      std::size_t k0, double tau_pred) {
  const auto& cfg = ts.cfg;
  const double slot = cfg.slot();
  const double xi = cfg.ppm_shift;
  auto predict = [&](std::size_t k) { return lc.offset + (1.0 + lc.drift) * static_cast<double>(k) * slot + tau_pred; };
  const THCode& code = ts.codes[static_cast<std::size_t>(ts.anchors[i])];
  MFCandidateCache cache(
      rx, [&](std::size_t j) { return synth_template(cfg, ts.pulse, code, j); },
      ts.rs.candidate_floor * ts.rs.threshold, [&](std::size_t j) { return predict(j) + 0.5 * xi; },
      1.5 * xi + ts.rs.model.tolerance + 2.0 / cfg.sample_rate);
  DemodParams p;
  p.threshold = ts.rs.threshold;
  p.c_thres = ts.sc->track.c_thres;
  p.model = ts.rs.model;
  p.resync_horizon = ts.rs.resync_horizon;
  p.candidate_floor = ts.rs.candidate_floor;
  // The first burst symbol is acquired as the strongest peak near either
  // predicted PPM position; its interval confidence is scored against the
  // prediction, the rest of the burst is chained from it.
  const double floor = ts.rs.candidate_floor * ts.rs.threshold;
  const double w = ts.sc->track.acquisition_window;
  const SampledSignal tmpl0 = synth_template(cfg, ts.pulse, code, k0);
  std::optional<DetectionEvent> first;
  int first_bit = 0;
  for (int q : {0, 1}) {
    const double c = predict(k0) + xi * q;
    const TimeWindow span = rx.span();
    const TimeWindow win{std::max(c - w, span.start), std::min(c + w, span.end - rx.period())};
    if (win.end <= win.start) continue;
    const auto d = detect_symbol(matched_filter(rx, tmpl0, win), floor);
    if (d && (!first || d->peak > first->peak)) {
      first = d;
      first_bit = q;
    }
  }
  LinkReading out;
  const auto burst = static_cast<std::size_t>(ts.sc->track.burst_symbols);
  if (!first) return out;
  SymbolEstimate head;
  head.index = k0;
  head.toa = first->toa;
  head.bit = first_bit;
  head.detected = true;
  head.conf.s = sai(first->peak, ts.rs.threshold);
  head.conf.l = sii(first->toa - predict(k0 - 1), 0, 0, ts.rs.model);
  head.conf.c = unified(head.conf.s, head.conf.l);
  auto res = demod_frame([&](std::size_t j, const TimeWindow& win) { return cache(j, win); },
                         Reference{first->toa, first_bit, k0}, burst - 1, p);
  res.symbols.insert(res.symbols.begin(), head);
  Mean tau;
  double csum = 0.0;
  for (const auto& e : res.symbols) {
    if (!e.detected) continue;
    csum += e.conf.c;
    if (!e.bit) continue;
    const double t_tx = static_cast<double>(e.index) * slot + xi * *e.bit;
    tau.add(e.toa - lc.offset - (1.0 + lc.drift) * t_tx);
  }
  out.confidence = csum / static_cast<double>(burst);
  if (tau.n > 0) out.tau = tau.mean();
  return out;
}

struct PolicyState {
  bool select = false;
  std::vector<Eigen::Vector2d> fixes;  // good fixes, newest last
  std::vector<double> errors;          // per epoch, NaN on failure
  long blocked_epochs = 0;
  long blocked_dropped = 0;
  std::vector<TrajectoryPoint> trajectory;
};

Eigen::Vector2d predict_position(const PolicyState& s) { return s.fixes.back(); }

struct RunResult {
  std::vector<PolicyState> policies;
  long calibrated = 0;
  Rms drift_error;  // ppm
};

RunResult run_track_case(const TrackScene& ts, const std::vector<bool>& policies, std::uint64_t seed) {
  const auto& t = ts.sc->track;
  const auto& net = ts.sc->network;
  const auto& cfg = ts.cfg;
  const std::size_t n = ts.anchors.size();
  Rng rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> jitter(0.0, 1.0);
  std::bernoulli_distribution bit(0.5);
  const double agent_offset = u01(rng) * net.max_offset;
  std::vector<ClockModel> clocks(n);
  for (std::size_t i = 0; i < n; ++i)
    clocks[i] = {agent_offset + u01(rng) * net.max_offset,
                 net.drift_ppm[static_cast<std::size_t>(ts.anchors[i])] * 1e-6};
  RunResult rr;
  const auto lc = calibrate(ts, clocks, rng);
  for (std::size_t i = 0; i < n; ++i)
    if (lc[i].valid) {
      ++rr.calibrated;
      rr.drift_error.add((lc[i].drift - clocks[i].drift) * 1e6);
    }
  for (bool sel : policies) {
    PolicyState s;
    s.select = sel;
    s.fixes.push_back(ts.path(0));
    rr.policies.push_back(std::move(s));
  }
  std::vector<Eigen::VectorXd> anchors2(n);
  for (std::size_t i = 0; i < n; ++i) anchors2[i] = ts.anchor(i).head<2>();
  const double slot = cfg.slot();
  const auto burst = static_cast<std::size_t>(t.burst_symbols);
  for (int e = 1; e <= t.epochs; ++e) {
    const Eigen::Vector2d truth = ts.path(e);
    const std::size_t k0 = ts.burst_start(e);
    std::vector<LinkState> links(n);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < n; ++i) {
      auto& l = links[i];
      l.code = &ts.codes[static_cast<std::size_t>(ts.anchors[i])];
      l.clock = clocks[i];
      l.tau = propagation_delay(ts.anchor(i), lift(truth)) + t.range_jitter * jitter(rng);
      l.first_symbol = k0;
      l.bits.resize(burst);
      for (auto& b : l.bits) b = bit(rng) ? 1 : 0;
      if (ts.blocked(i, e)) {
        l.profile.multipath = true;
        l.profile.taps = {Tap{0.0, t.blocked_direct_gain}, Tap{t.reflection_delay, t.reflection_gain}};
      }
      lo = std::min(lo, l.clock.warp(static_cast<double>(k0) * slot) + l.tau);
      hi = std::max(hi, l.clock.warp(static_cast<double>(k0 + burst) * slot) + l.tau);
    }
    const double margin = 2.0 * slot;
    const auto rx = render_links(cfg, ts.pulse, links, {lo - margin, hi + margin}, ts.noise_var, rng);
    for (auto& s : rr.policies) {
      const Eigen::Vector2d pred = predict_position(s);
      std::vector<LinkReading> reading(n);
      for (std::size_t i = 0; i < n; ++i)
        if (lc[i].valid)
          reading[i] = read_link(ts, rx, i, lc[i], k0, (pred - anchors2[i]).norm() / kSpeedOfLight);
      std::vector<std::size_t> usable;
      for (std::size_t i = 0; i < n; ++i)
        if (reading[i].tau) usable.push_back(i);
      std::vector<std::size_t> chosen = usable;
      if (s.select && usable.size() > static_cast<std::size_t>(t.select)) {
        std::vector<double> conf;
        for (auto i : usable) conf.push_back(reading[i].confidence);
        chosen.clear();
        for (auto k : select_anchors_by_confidence(conf, static_cast<std::size_t>(t.select))) chosen.push_back(usable[k]);
      }
      for (std::size_t i = 0; i < n; ++i)
        if (ts.blocked(i, e)) {
          ++s.blocked_epochs;
          s.blocked_dropped += std::find(chosen.begin(), chosen.end(), i) == chosen.end();
        }
      double err = std::numeric_limits<double>::quiet_NaN();
      Eigen::Vector2d est = pred;
      if (chosen.size() >= 2) {
        std::vector<double> beta;
        std::vector<Eigen::VectorXd> a;
        for (auto i : chosen) {
          beta.push_back(*reading[i].tau);
          a.push_back(anchors2[i]);
        }
        try {
          est = toa_solve(beta, a, Eigen::VectorXd(pred)).position;
          err = (est - truth).norm();
          s.fixes.push_back(est);
        } catch (const SolverError&) {
        }
      }
      s.errors.push_back(err);
      s.trajectory.push_back({e, truth, est});
    }
  }
  return rr;
}

}  // namespace

TrackingOutput run_tracking(const ScenarioConfig& sc) {
  const auto& t = sc.track;
  TrackingOutput out;
  struct Case {
    std::string name;
    std::vector<int> anchors;
    std::vector<bool> policies;
    bool blockage;
  };
  const std::vector<Case> cases{{"case1", t.case1, {false}, false}, {"case2", t.case2, {false, true}, true}};
  std::uint64_t cidx = 0;
  for (const auto& c : cases) {
    TrackScene ts(sc, c.anchors, c.blockage);
    std::vector<RunResult> runs(static_cast<std::size_t>(t.runs));
    const std::uint64_t base = derive_seed(sc.run.seed, {7, cidx});
    const double case_id = static_cast<double>(++cidx);
#pragma omp parallel for schedule(dynamic, 1)
    for (int r = 0; r < t.runs; ++r)
      runs[static_cast<std::size_t>(r)] = run_track_case(ts, c.policies, derive_seed(base, {static_cast<std::uint64_t>(r)}));
    Rms drift;
    long calibrated = 0;
    for (const auto& r : runs) {
      drift.merge(r.drift_error);
      calibrated += r.calibrated;
    }
    const long links = static_cast<long>(c.anchors.size()) * t.runs;
    const double cal = static_cast<double>(calibrated) / static_cast<double>(links);
    out.rows.push_back(row("track", {{"case", case_id}}, "calibrated_link_rate", cal,
                           prop_se(cal, links), links));
    out.rows.push_back(row("track", {{"case", case_id}}, "drift_rmse_ppm", drift.value(), drift.se(),
                           drift.n()));
    for (std::size_t p = 0; p < c.policies.size(); ++p) {
      const bool sel = c.policies[p];
      Rms err;
      long n = 0, fail = 0, below1 = 0, below2 = 0, blocked = 0, dropped = 0;
      for (const auto& r : runs) {
        const auto& s = r.policies[p];
        blocked += s.blocked_epochs;
        dropped += s.blocked_dropped;
        for (double x : s.errors) {
          ++n;
          if (std::isnan(x)) {
            ++fail;
            continue;
          }
          err.add(x);
          below1 += x < 0.1;
          below2 += x < 0.2;
        }
      }
      std::vector<std::pair<std::string, double>> sw{{"case", case_id},
                                                     {"selected_links", sel ? t.select : 0.0}};
      const double c1 = static_cast<double>(below1) / static_cast<double>(n);
      const double c2 = static_cast<double>(below2) / static_cast<double>(n);
      const double fr = static_cast<double>(fail) / static_cast<double>(n);
      out.rows.push_back(row("track", sw, "cdf_err_below_0.1m", c1, prop_se(c1, n), n));
      out.rows.push_back(row("track", sw, "cdf_err_below_0.2m", c2, prop_se(c2, n), n));
      out.rows.push_back(row("track", sw, "rmse_m", err.value(), err.se(), err.n()));
      out.rows.push_back(row("track", sw, "fix_failure_rate", fr, prop_se(fr, n), n));
      if (blocked > 0) {
        const double dr = static_cast<double>(dropped) / static_cast<double>(blocked);
        out.rows.push_back(row("track", sw, "blocked_link_dropped_rate", dr, prop_se(dr, blocked), blocked));
      }
      out.trajectories.emplace_back("trajectory_" + c.name + (sel ? "_select" : "_all"), runs[0].policies[p].trajectory);
    }
  }
  return out;
}

}  // namespace uwbicl
