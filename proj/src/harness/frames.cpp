#include <algorithm>
#include <cmath>
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

// Everything that stays fixed across the trials of one sweep point.
struct FrameScene {
  const ScenarioConfig* sc = nullptr;
  FrameConfig cfg;
  Pulse pulse;
  std::vector<THCode> codes;
  std::vector<std::vector<SampledSignal>> sfd_tmpl;
  double noise_var = 0.0;
  ReceiverSetup rs;
  double ebn0_db = 0.0;

  FrameScene(const ScenarioConfig& s, const FrameConfig& frame, double ebn0)
      : sc(&s), cfg(frame), pulse(gauss2_pulse(frame.pulse_duration, frame.sample_rate)), ebn0_db(ebn0) {
    cfg.validate();
    const std::size_t na = s.network.anchors.size();
    codes = anchor_codes(cfg, s.network.gold_register_length, na, static_cast<std::size_t>(cfg.total_symbols()));
    for (const auto& c : codes) sfd_tmpl.push_back(sfd_templates(cfg, pulse, c));
    noise_var = noise_variance_for(cfg, ebn0);
    const double sa2 = sigma_a_sq(pulse, cfg.pri);
    const double vi = interference_variance(cfg.repetitions, cfg.pulse_energy, sa2,
                                            std::vector<double>(na - 1, cfg.pulse_energy));
    rs.threshold = cfar_threshold(s.receiver.p_fa, sfd_tmpl[0][0], noise_var, vi);
    rs.model = IntervalModel::from(cfg, s.receiver.sii_sigma_scale * sii_sigma(pulse.rms_bandwidth(), ebn0));
    rs.resync_horizon = s.receiver.resync_horizon;
    rs.candidate_floor = s.receiver.candidate_floor;
    rs.sfd.slot_tolerance = s.receiver.slot_tolerance;
  }
};

struct FrameDraw {
  std::vector<LinkState> links;
  std::vector<std::vector<int>> payload;
  Eigen::Vector3d agent;
  std::vector<double> offset_estimate;  // calibrated anchor offsets
  SampledSignal rx;
  TimeWindow scan;
};

FrameDraw draw_frame(const FrameScene& fs, Rng& rng) {
  const auto& net = fs.sc->network;
  const auto& cfg = fs.cfg;
  const std::size_t na = net.anchors.size();
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::bernoulli_distribution bit(0.5);
  std::normal_distribution<double> beacon(0.0, net.beacon_sigma);
  FrameDraw d;
  d.agent = net.agent;
  for (int k = 0; k < 3; ++k) d.agent[k] += (2.0 * u01(rng) - 1.0) * net.agent_jitter;
  const double agent_offset = u01(rng) * net.max_offset;
  std::vector<double> anchor_offset(na, 0.0);
  for (std::size_t m = 1; m < na; ++m) anchor_offset[m] = u01(rng) * net.max_offset;

  std::vector<std::vector<double>> meas(na);
  std::vector<double> tau_b(na, 0.0);
  for (std::size_t m = 0; m < na; ++m) {
    tau_b[m] = propagation_delay(net.anchors[0], net.anchors[m]);
    for (int i = 0; i < net.beacon_count; ++i) meas[m].push_back(anchor_offset[m] + tau_b[m] + beacon(rng));
  }
  d.offset_estimate = anchor_offsets(meas, tau_b);
  d.offset_estimate[0] = 0.0;

  const auto gains = frame_gains(cfg);
  double max_tau = 0.0;
  for (std::size_t m = 0; m < na; ++m) {
    LinkState l;
    l.code = &fs.codes[m];
    l.clock = {agent_offset + anchor_offset[m], net.drift_ppm[m] * 1e-6};
    l.tau = propagation_delay(net.anchors[m], d.agent);
    max_tau = std::max(max_tau, l.tau);
    if (net.path_loss == "free_space") l.profile.attenuation = free_space_gain(net.anchors[m], d.agent);
    if (net.channel == "multipath") {
      l.profile.multipath = true;
      l.profile.delay_spread = cfg.delay_spread;
      l.profile.taps = exponential_taps(0.5e9, 5e-9, cfg.delay_spread, rng);
    }
    std::vector<int> payload(static_cast<std::size_t>(cfg.payload_symbols));
    for (auto& b : payload) b = bit(rng) ? 1 : 0;
    l.bits = frame_bits(cfg, payload);
    l.gains = gains;
    d.payload.push_back(std::move(payload));
    d.links.push_back(std::move(l));
  }
  const double lead = 2.0 * net.max_offset + max_tau;
  d.scan = {0.0, lead + cfg.pulse_duration};
  const TimeWindow win{0.0, lead + (cfg.total_symbols() + 1) * cfg.slot() * (1.0 + 1e-3)};
  d.rx = render_links(cfg, fs.pulse, d.links, win, fs.noise_var, rng);
  return d;
}

struct SeriesEntry {
  PseudoDelay pd;
  double c = 0.0;
  bool reference = false;
};

std::vector<SeriesEntry> series_of(const DemodResult& res, const FrameConfig& cfg, double t_sfd) {
  std::vector<SeriesEntry> s;
  s.push_back({{0, pseudo_delay(t_sfd, 0, 0, cfg)}, 1.0, true});
  for (const auto& e : res.symbols)
    if (e.detected && e.bit) {
      const long k = static_cast<long>(e.index);
      s.push_back({{k, pseudo_delay(e.toa, *e.bit, k, cfg)}, e.conf.c, e.conf.is_reference});
    }
  return s;
}

// Per-link outcome of one frame at one confidence threshold.
struct LinkOutcome {
  bool locked = false;
  bool abandoned = false;
  BitTally bits;
  long references = 0;
  long symbols = 0;
  std::optional<double> drift_ls;
  std::optional<double> drift_mwls;
  std::optional<double> beta;  // drift-compensated mean pseudo-delay of reference symbols
};

struct FrameOutcome {
  std::vector<std::vector<LinkOutcome>> link;  // [c_thres][anchor]
  std::vector<std::optional<double>> loc_error;
  Eigen::Vector3d agent;
};

FrameOutcome run_frame(const FrameScene& fs, const std::vector<double>& c_thres, bool localize, Rng& rng) {
  const auto& cfg = fs.cfg;
  auto d = draw_frame(fs, rng);
  const std::size_t na = d.links.size();
  FrameOutcome out;
  out.agent = d.agent;
  out.link.assign(c_thres.size(), std::vector<LinkOutcome>(na));
  out.loc_error.assign(c_thres.size(), std::nullopt);
  for (std::size_t m = 0; m < na; ++m) {
    const auto sfd = detect_sfd(d.rx, cfg, fs.sfd_tmpl[m], fs.rs.threshold, d.scan, fs.rs.sfd);
    if (!sfd.detected) {
      for (std::size_t c = 0; c < c_thres.size(); ++c) out.link[c][m].bits = {d.payload[m].size(), d.payload[m].size()};
      continue;
    }
    const double t_sfd = *sfd.reference;
    auto cache = link_candidates(d.rx, cfg, fs.pulse, fs.codes[m], fs.rs, t_sfd);
    for (std::size_t c = 0; c < c_thres.size(); ++c) {
      LinkOutcome& o = out.link[c][m];
      o.locked = true;
      const auto res = demod_link(cache, cfg, fs.rs, t_sfd, c_thres[c]);
      o.abandoned = res.abandoned;
      o.bits = payload_errors(res, cfg, d.payload[m]);
      for (const auto& e : res.symbols) {
        ++o.symbols;
        o.references += e.conf.is_reference;
      }
      const auto s = series_of(res, cfg, t_sfd);
      std::vector<PseudoDelay> pd;
      std::vector<double> conf;
      for (const auto& e : s) {
        pd.push_back(e.pd);
        conf.push_back(e.c);
      }
      try {
        o.drift_ls = drift_ls(pd, cfg.slot()).drift;
      } catch (const InsufficientData&) {
      }
      try {
        o.drift_mwls = drift_mwls(pd, conf, c_thres[c], cfg.slot()).drift;
      } catch (const InsufficientData&) {
      }
      if (o.drift_mwls) {
        Mean b;
        for (const auto& e : s)
          if (e.reference) b.add(e.pd.beta - *o.drift_mwls * static_cast<double>(e.pd.index) * cfg.slot());
        if (b.n > 0) o.beta = b.mean();
      }
    }
  }
  if (!localize) return out;
  std::vector<Eigen::VectorXd> anchors;
  for (const auto& a : fs.sc->network.anchors) anchors.emplace_back(a);
  for (std::size_t c = 0; c < c_thres.size(); ++c) {
    std::vector<double> beta;
    for (std::size_t m = 0; m < na; ++m) {
      if (!out.link[c][m].beta) break;
      beta.push_back(*out.link[c][m].beta - d.offset_estimate[m]);
    }
    if (beta.size() != na) continue;
    try {
      const auto fix = tdoa_solve(beta, anchors, centroid(anchors));
      out.loc_error[c] = (fix.position - Eigen::VectorXd(d.agent)).norm();
    } catch (const SolverError&) {
    }
  }
  return out;
}

std::vector<FrameOutcome> run_frames(const FrameScene& fs, const std::vector<double>& c_thres, bool localize,
                                     long trials, std::uint64_t seed) {
  std::vector<FrameOutcome> out(static_cast<std::size_t>(trials));
#pragma omp parallel for schedule(dynamic, 1)
  for (long t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(t)}));
    out[static_cast<std::size_t>(t)] = run_frame(fs, c_thres, localize, rng);
  }
  return out;
}

struct BerAggregate {
  Mean per_frame;  // error fraction per locked link-frame
  long errors = 0;
  long bits = 0;
  long links = 0;
  long abandoned = 0;
  long references = 0;
  long symbols = 0;
};

BerAggregate ber_of(const std::vector<FrameOutcome>& frames, std::size_t c) {
  BerAggregate a;
  for (const auto& f : frames)
    for (const auto& o : f.link[c]) {
      if (!o.locked) continue;
      ++a.links;
      a.errors += static_cast<long>(o.bits.errors);
      a.bits += static_cast<long>(o.bits.bits);
      a.abandoned += o.abandoned;
      a.references += o.references;
      a.symbols += o.symbols;
      a.per_frame.add(o.bits.bits ? static_cast<double>(o.bits.errors) / static_cast<double>(o.bits.bits) : 0.0);
    }
  return a;
}

double sfd_miss_rate(const std::vector<FrameOutcome>& frames, long& links) {
  long miss = 0;
  links = 0;
  for (const auto& f : frames)
    for (const auto& o : f.link[0]) {
      ++links;
      miss += !o.locked;
    }
  return links ? static_cast<double>(miss) / static_cast<double>(links) : 0.0;
}

}  // namespace

std::vector<ResultRow> run_drift(const ScenarioConfig& sc) {
  const long trials = sc.run.effective_trials();
  FrameConfig frame = sc.frame;
  frame.payload_symbols = sc.drift.window_symbols - frame.sfd_symbols;
  std::vector<ResultRow> rows;
  std::uint64_t eidx = 0;
  for (double ebn0 : sc.drift.ebn0_db) {
    FrameScene fs(sc, frame, ebn0);
    const auto frames = run_frames(fs, sc.drift.c_thres, false, trials, derive_seed(sc.run.seed, {3, eidx++}));
    for (std::size_t c = 0; c < sc.drift.c_thres.size(); ++c) {
      Rms ls;
      Rms mwls;
      long failures = 0;
      long locked = 0;
      for (const auto& f : frames)
        for (std::size_t m = 0; m < f.link[c].size(); ++m) {
          const auto& o = f.link[c][m];
          if (!o.locked) continue;
          ++locked;
          if (!o.drift_ls || !o.drift_mwls) {
            ++failures;
            continue;
          }
          const double truth = sc.network.drift_ppm[m];
          ls.add(*o.drift_ls * 1e6 - truth);
          mwls.add(*o.drift_mwls * 1e6 - truth);
        }
      std::vector<std::pair<std::string, double>> sw{{"ebn0_db", ebn0}, {"c_thres", sc.drift.c_thres[c]}};
      rows.push_back(row("drift", sw, "rmse_ls_ppm", ls.value(), ls.se(), ls.n()));
      rows.push_back(row("drift", sw, "rmse_mwls_ppm", mwls.value(), mwls.se(), mwls.n()));
      const double fr = locked ? static_cast<double>(failures) / static_cast<double>(locked) : 0.0;
      rows.push_back(row("drift", sw, "estimator_failure_rate", fr, prop_se(fr, locked), locked));
    }
    long links = 0;
    const double miss = sfd_miss_rate(frames, links);
    rows.push_back(row("drift", {{"ebn0_db", ebn0}}, "sfd_miss_rate", miss, prop_se(miss, links), links));
  }
  return rows;
}

namespace {

void ber_rows(std::vector<ResultRow>& rows, const std::string& exp, std::vector<std::pair<std::string, double>> sw,
              const BerAggregate& a) {
  const double ber = a.bits ? static_cast<double>(a.errors) / static_cast<double>(a.bits) : 0.0;
  rows.push_back(row(exp, sw, "ber", ber, a.per_frame.se(), a.links));
  const double ab = a.links ? static_cast<double>(a.abandoned) / static_cast<double>(a.links) : 0.0;
  rows.push_back(row(exp, sw, "abandon_rate", ab, prop_se(ab, a.links), a.links));
  const double rf = a.symbols ? static_cast<double>(a.references) / static_cast<double>(a.symbols) : 0.0;
  rows.push_back(row(exp, std::move(sw), "reference_fraction", rf, prop_se(rf, a.symbols), a.links));
}

void rmse_rows(std::vector<ResultRow>& rows, const std::string& exp, std::vector<std::pair<std::string, double>> sw,
               const std::vector<FrameOutcome>& frames, std::size_t c) {
  Rms r;
  long fail = 0;
  long within = 0;
  for (const auto& f : frames) {
    if (!f.loc_error[c]) {
      ++fail;
      continue;
    }
    r.add(*f.loc_error[c]);
    within += *f.loc_error[c] < 0.1;
  }
  const long n = static_cast<long>(frames.size());
  rows.push_back(row(exp, sw, "rmse_m", r.value(), r.se(), r.n()));
  const double cdf = r.n() ? static_cast<double>(within) / static_cast<double>(r.n()) : 0.0;
  rows.push_back(row(exp, sw, "cdf_err_below_0.1m", cdf, prop_se(cdf, r.n()), r.n()));
  const double fr = static_cast<double>(fail) / static_cast<double>(n);
  rows.push_back(row(exp, std::move(sw), "localization_failure_rate", fr, prop_se(fr, n), n));
}

}  // namespace

std::vector<ResultRow> run_ber(const ScenarioConfig& sc) {
  const long trials = sc.run.effective_trials();
  std::vector<ResultRow> rows;
  std::uint64_t eidx = 0;
  for (double ebn0 : sc.ber.ebn0_db) {
    FrameScene fs(sc, sc.frame, ebn0);
    const auto frames = run_frames(fs, sc.ber.c_thres, false, trials, derive_seed(sc.run.seed, {4, eidx++}));
    for (std::size_t c = 0; c < sc.ber.c_thres.size(); ++c)
      ber_rows(rows, "ber", {{"ebn0_db", ebn0}, {"c_thres", sc.ber.c_thres[c]}}, ber_of(frames, c));
    long links = 0;
    const double miss = sfd_miss_rate(frames, links);
    rows.push_back(row("ber", {{"ebn0_db", ebn0}}, "sfd_miss_rate", miss, prop_se(miss, links), links));
  }
  return rows;
}

std::vector<ResultRow> run_rmse(const ScenarioConfig& sc) {
  const long trials = sc.run.effective_trials();
  std::vector<ResultRow> rows;
  std::uint64_t eidx = 0;
  for (double ebn0 : sc.rmse.ebn0_db) {
    FrameScene fs(sc, sc.frame, ebn0);
    const auto frames = run_frames(fs, sc.rmse.c_thres, true, trials, derive_seed(sc.run.seed, {5, eidx++}));
    for (std::size_t c = 0; c < sc.rmse.c_thres.size(); ++c)
      rmse_rows(rows, "rmse", {{"ebn0_db", ebn0}, {"c_thres", sc.rmse.c_thres[c]}}, frames, c);
  }
  return rows;
}

std::vector<ResultRow> run_repetition(const ScenarioConfig& sc) {
  const long trials = sc.run.effective_trials();
  const auto& rc = sc.repetition;
  std::vector<ResultRow> rows;
  std::uint64_t eidx = 0;
  for (double ebn0 : rc.ebn0_db) {
    // Both variants share seeds, so payloads, offsets and positions match.
    const std::uint64_t seed = derive_seed(sc.run.seed, {6, eidx++});
    FrameConfig more_reps = sc.frame;
    more_reps.repetitions = 2 * rc.base_repetitions;
    FrameConfig more_power = sc.frame;
    more_power.repetitions = rc.base_repetitions;
    more_power.pulse_energy = 2.0 * sc.frame.pulse_energy;
    FrameScene a(sc, more_reps, ebn0);
    FrameScene b(sc, more_power, ebn0);
    const auto fa = run_frames(a, {rc.c_thres}, true, trials, seed);
    const auto fb = run_frames(b, {rc.c_thres}, true, trials, seed);
    for (const auto& [name, frames, nr] : {std::tuple{"double_repetitions", &fa, more_reps.repetitions},
                                           std::tuple{"double_power", &fb, more_power.repetitions}}) {
      std::vector<std::pair<std::string, double>> sw{{"ebn0_db", ebn0}, {"repetitions", nr}, {"c_thres", rc.c_thres}};
      ber_rows(rows, std::string("repetition_") + name, sw, ber_of(*frames, 0));
      rmse_rows(rows, std::string("repetition_") + name, sw, *frames, 0);
    }
    Mean dber;
    Mean dsq;
    for (long t = 0; t < trials; ++t) {
      const auto& x = fa[static_cast<std::size_t>(t)];
      const auto& y = fb[static_cast<std::size_t>(t)];
      long ex = 0, ey = 0, n = 0;
      for (std::size_t m = 0; m < x.link[0].size(); ++m) {
        ex += static_cast<long>(x.link[0][m].bits.errors);
        ey += static_cast<long>(y.link[0][m].bits.errors);
        n += static_cast<long>(x.link[0][m].bits.bits);
      }
      dber.add(static_cast<double>(ex - ey) / static_cast<double>(std::max(n, 1L)));
      if (x.loc_error[0] && y.loc_error[0]) dsq.add(*x.loc_error[0] * *x.loc_error[0] - *y.loc_error[0] * *y.loc_error[0]);
    }
    rows.push_back(row("repetition_paired", {{"ebn0_db", ebn0}}, "ber_difference", dber.mean(), dber.se(), dber.n));
    rows.push_back(row("repetition_paired", {{"ebn0_db", ebn0}}, "sq_error_difference_m2", dsq.mean(), dsq.se(), dsq.n));
  }
  return rows;
}

}  // namespace uwbicl
