#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "common.hpp"
#include "uwbicl/channel.hpp"
#include "uwbicl/detection.hpp"
#include "uwbicl/network.hpp"
#include "uwbicl/rng.hpp"
#include "uwbicl/sfd.hpp"

namespace uwbicl {

using detail::prop_se;
using detail::row;

namespace {

constexpr double kLead = 100e-9;        // wanted run starts here, on the sample grid
constexpr std::size_t kCodeSymbols = 128;

// Wanted symbols at known instants plus interferers with random offsets and
// TH phases; returns the MF decision value at each true instant.
struct DecisionScene {
  FrameConfig cfg;
  Pulse pulse;
  std::vector<THCode> codes;
  std::vector<SampledSignal> templates;
  std::vector<double> gains;
  double noise_var = 0.0;
  int interferers = 0;

  DecisionScene(const ScenarioConfig& sc, int repetitions, double ebn0_db, int interferers_, int symbols)
      : cfg(sc.frame), pulse(gauss2_pulse(sc.frame.pulse_duration, sc.frame.sample_rate)), interferers(interferers_) {
    cfg.repetitions = repetitions;
    codes = anchor_codes(cfg, sc.network.gold_register_length, static_cast<std::size_t>(interferers) + 1, kCodeSymbols);
    for (int j = 0; j < symbols; ++j) templates.push_back(synth_template(cfg, pulse, codes[0], static_cast<std::size_t>(j)));
    gains.assign(static_cast<std::size_t>(symbols), 1.0);
    noise_var = noise_variance_for(cfg, ebn0_db);
  }

  double threshold(double p_fa, double sigma_a2) const {
    const double vi = interference_variance(cfg.repetitions, cfg.pulse_energy, sigma_a2,
                                            std::vector<double>(static_cast<std::size_t>(interferers), cfg.pulse_energy));
    return cfar_threshold(p_fa, templates[0], noise_var, vi);
  }

  std::vector<double> draw(Rng& rng) const {
    const double slot = cfg.slot();
    const auto nsym = templates.size();
    std::vector<LinkState> links;
    LinkState w;
    w.code = &codes[0];
    w.clock.offset = kLead;
    w.bits.assign(nsym, 0);
    w.gains = gains;
    links.push_back(w);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::bernoulli_distribution bit(0.5);
    std::uniform_int_distribution<std::size_t> phase(0, kCodeSymbols - nsym - 3);
    for (int i = 0; i < interferers; ++i) {
      LinkState l;
      l.code = &codes[static_cast<std::size_t>(i) + 1];
      l.first_symbol = phase(rng);
      l.clock.offset = kLead - u01(rng) * slot - static_cast<double>(l.first_symbol) * slot;
      l.bits.resize(nsym + 2);
      for (auto& b : l.bits) b = bit(rng) ? 1 : 0;
      links.push_back(std::move(l));
    }
    const TimeWindow win{0.0, kLead + static_cast<double>(nsym) * slot + cfg.pulse_duration};
    const auto rx = render_links(cfg, pulse, links, win, noise_var, rng);
    std::vector<double> v(nsym);
    for (std::size_t j = 0; j < nsym; ++j) {
      const double t = kLead + static_cast<double>(j) * slot;
      v[j] = matched_filter(rx, templates[j], {t, t}).values.at(0);
    }
    return v;
  }
};

}  // namespace

PdPoint pd_monte_carlo(const ScenarioConfig& sc, int repetitions, double ebn0_db, int interferers, long trials,
                       std::uint64_t seed) {
  DecisionScene scene(sc, repetitions, ebn0_db, interferers, 1);
  const double sa2 = sigma_a_sq(scene.pulse, scene.cfg.pri);
  const double gamma = scene.threshold(sc.receiver.p_fa, sa2);
  std::vector<char> hit(static_cast<std::size_t>(trials), 0);
#pragma omp parallel for schedule(dynamic, 64)
  for (long t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(t)}));
    hit[static_cast<std::size_t>(t)] = scene.draw(rng)[0] > gamma;
  }
  PdPoint p;
  p.trials = trials;
  p.empirical = static_cast<double>(std::count(hit.begin(), hit.end(), 1)) / static_cast<double>(trials);
  p.analytic = analytic_pd(link_budget(scene.cfg, ebn0_db, sc.receiver.p_fa, sa2, interferers));
  return p;
}

FalseAlarmPoint false_alarm_monte_carlo(const ScenarioConfig& sc, long windows, std::uint64_t seed) {
  const FrameConfig& cfg = sc.frame;
  const Pulse pulse = gauss2_pulse(cfg.pulse_duration, cfg.sample_rate);
  const auto codes = anchor_codes(cfg, sc.network.gold_register_length, 1, 1);
  const auto tmpl = synth_template(cfg, pulse, codes[0], 0);
  const double noise_var = noise_variance_for(cfg, 11.0);
  const double gamma = cfar_threshold(sc.receiver.p_fa, tmpl, noise_var);
  // Decision instants one slot apart touch disjoint noise samples.
  const long per_block = 64;
  const long blocks = (windows + per_block - 1) / per_block;
  std::vector<long> alarms(static_cast<std::size_t>(blocks), 0);
#pragma omp parallel for schedule(dynamic, 4)
  for (long b = 0; b < blocks; ++b) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(b)}));
    const long n = std::min(per_block, windows - b * per_block);
    SampledSignal rx(cfg.sample_rate, 0.0, static_cast<std::size_t>((n + 1) * tmpl.size()));
    add_awgn(rx, noise_var, rng);
    long a = 0;
    for (long i = 0; i < n; ++i) {
      const double t = rx.time_at(static_cast<std::size_t>(i) * tmpl.size());
      if (detect_symbol(matched_filter(rx, tmpl, {t, t}), gamma)) ++a;
    }
    alarms[static_cast<std::size_t>(b)] = a;
  }
  FalseAlarmPoint out;
  out.windows = windows;
  for (long a : alarms) out.alarms += a;
  return out;
}

SfdMcPoint sfd_monte_carlo(const ScenarioConfig& sc, double ebn0_db, long trials, std::uint64_t seed) {
  const FrameConfig& cfg = sc.frame;
  const Pulse pulse = gauss2_pulse(cfg.pulse_duration, cfg.sample_rate);
  const auto codes = anchor_codes(cfg, sc.network.gold_register_length, 1, static_cast<std::size_t>(cfg.sfd_symbols));
  const auto templates = sfd_templates(cfg, pulse, codes[0]);
  const double noise_var = noise_variance_for(cfg, ebn0_db);
  const double gamma = cfar_threshold(sc.receiver.p_fa, templates[0], noise_var);
  const double fs = cfg.sample_rate;
  const double tol = sc.receiver.slot_tolerance / fs;
  const int tail = cfg.sfd_tail();
  const auto gains = frame_gains(cfg);
  struct Out {
    bool det = false;
    bool first = false;
    std::vector<char> tail;
  };
  std::vector<Out> res(static_cast<std::size_t>(trials));
#pragma omp parallel for schedule(dynamic, 16)
  for (long t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(t)}));
    std::uniform_real_distribution<double> off(0.0, sc.network.max_offset);
    LinkState l;
    l.code = &codes[0];
    l.clock.offset = off(rng);
    l.bits.assign(static_cast<std::size_t>(cfg.sfd_symbols), 0);
    l.gains.assign(gains.begin(), gains.begin() + cfg.sfd_symbols);
    const TimeWindow win{0.0, sc.network.max_offset + (cfg.sfd_symbols + 1) * cfg.slot()};
    const auto rx = render_links(cfg, pulse, {l}, win, noise_var, rng);
    const double truth = l.clock.offset;
    SFDOptions opt;
    opt.slot_tolerance = sc.receiver.slot_tolerance;
    const auto r = detect_sfd(rx, cfg, templates, gamma, {0.0, sc.network.max_offset + cfg.pulse_duration}, opt);
    Out& o = res[static_cast<std::size_t>(t)];
    o.det = r.detected && std::abs(*r.reference - truth) <= tol + 0.5 / fs;
    auto above = [&](int j) {
      const double c = truth + j * cfg.slot();
      const auto m = matched_filter(rx, templates[static_cast<std::size_t>(j)], {c - tol, c + tol});
      return *std::max_element(m.values.begin(), m.values.end()) > gamma;
    };
    o.first = above(0);
    o.tail.resize(static_cast<std::size_t>(tail));
    for (int j = 1; j <= tail; ++j) o.tail[static_cast<std::size_t>(j - 1)] = above(j);
  }
  SfdMcPoint p;
  p.trials = trials;
  p.tail_hits.assign(static_cast<std::size_t>(tail), 0);
  for (const auto& o : res) {
    p.detected += o.det;
    p.first_hits += o.first;
    for (int j = 0; j < tail; ++j) p.tail_hits[static_cast<std::size_t>(j)] += o.tail[static_cast<std::size_t>(j)];
  }
  return p;
}

std::vector<ResultRow> run_roc(const ScenarioConfig& sc) {
  const long trials = sc.run.effective_trials();
  const Pulse pulse = gauss2_pulse(sc.frame.pulse_duration, sc.frame.sample_rate);
  const double sa2 = sigma_a_sq(pulse, sc.frame.pri);
  std::vector<std::pair<int, double>> curves;
  for (double e : sc.roc.ebn0_db) curves.emplace_back(sc.roc.repetitions, e);
  for (int nr : sc.roc.repetitions_grid)
    if (std::find(curves.begin(), curves.end(), std::make_pair(nr, sc.roc.fixed_ebn0_db)) == curves.end())
      curves.emplace_back(nr, sc.roc.fixed_ebn0_db);
  std::vector<ResultRow> rows;
  std::uint64_t cidx = 0;
  for (const auto& [nr, ebn0] : curves) {
    const auto analytic = roc_points(sc.frame, sa2, {ebn0}, {nr}, sc.roc.p_fa, sc.roc.interferers).front();
    DecisionScene scene(sc, nr, ebn0, sc.roc.interferers, sc.frame.sfd_symbols);
    const int need = scene.cfg.sfd_required();
    std::vector<double> gammas;
    for (double pfa : sc.roc.p_fa)
      gammas.push_back(pfa >= 1.0 ? -std::numeric_limits<double>::infinity() : scene.threshold(pfa, sa2));
    std::vector<std::vector<char>> det(static_cast<std::size_t>(trials), std::vector<char>(gammas.size(), 0));
    const std::uint64_t cs = derive_seed(sc.run.seed, {1, cidx++});
#pragma omp parallel for schedule(dynamic, 16)
    for (long t = 0; t < trials; ++t) {
      Rng rng(derive_seed(cs, {static_cast<std::uint64_t>(t)}));
      const auto v = scene.draw(rng);
      for (std::size_t g = 0; g < gammas.size(); ++g) {
        int ok = 0;
        for (std::size_t j = 1; j < v.size(); ++j) ok += v[j] > gammas[g];
        det[static_cast<std::size_t>(t)][g] = v[0] > gammas[g] && ok >= need;
      }
    }
    for (std::size_t g = 0; g < gammas.size(); ++g) {
      long k = 0;
      for (const auto& d : det) k += d[g];
      const double p = static_cast<double>(k) / static_cast<double>(trials);
      std::vector<std::pair<std::string, double>> sw{{"ebn0_db", ebn0}, {"repetitions", nr}, {"p_fa", sc.roc.p_fa[g]}};
      rows.push_back(row("roc", sw, "p_fd_analytic", analytic.p_fd[g], 0.0, 0));
      rows.push_back(row("roc", sw, "p_fd_mc", p, prop_se(p, trials), trials));
    }
  }
  return rows;
}

std::vector<ResultRow> run_sfd_split(const ScenarioConfig& sc) {
  const long trials = sc.run.effective_trials();
  const Pulse pulse = gauss2_pulse(sc.frame.pulse_duration, sc.frame.sample_rate);
  const double sa2 = sigma_a_sq(pulse, sc.frame.pri);
  const auto grid = sc.sfd_split.grid();
  std::vector<ResultRow> rows;
  std::uint64_t eidx = 0;
  for (double ebn0 : sc.sfd_split.ebn0_db) {
    const auto link = link_budget(sc.frame, ebn0, sc.receiver.p_fa, sa2, sc.sfd_split.interferers);
    const auto sweep = sweep_energy_split(link, sc.frame, grid);
    std::size_t best = 0;
    for (std::size_t i = 0; i < sweep.size(); ++i) {
      if (sweep[i].p_fd > sweep[best].p_fd) best = i;
      rows.push_back(row("sfd_split", {{"ebn0_db", ebn0}, {"fraction", sweep[i].fraction}}, "p_fd_analytic",
                         sweep[i].p_fd, 0.0, 0));
    }
    DecisionScene scene(sc, sc.frame.repetitions, ebn0, sc.sfd_split.interferers, sc.frame.sfd_symbols);
    const double gamma = scene.threshold(sc.receiver.p_fa, sa2);
    const int need = scene.cfg.sfd_required();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      FrameConfig fc = scene.cfg;
      fc.first_symbol_energy_fraction = grid[i];
      const auto g = frame_gains(fc);
      DecisionScene s2 = scene;
      s2.gains.assign(g.begin(), g.begin() + fc.sfd_symbols);
      std::vector<char> det(static_cast<std::size_t>(trials), 0);
      const std::uint64_t ss = derive_seed(sc.run.seed, {2, eidx, i});
#pragma omp parallel for schedule(dynamic, 16)
      for (long t = 0; t < trials; ++t) {
        Rng rng(derive_seed(ss, {static_cast<std::uint64_t>(t)}));
        const auto v = s2.draw(rng);
        int ok = 0;
        for (std::size_t j = 1; j < v.size(); ++j) ok += v[j] > gamma;
        det[static_cast<std::size_t>(t)] = v[0] > gamma && ok >= need;
      }
      const double p = static_cast<double>(std::count(det.begin(), det.end(), 1)) / static_cast<double>(trials);
      rows.push_back(row("sfd_split", {{"ebn0_db", ebn0}, {"fraction", grid[i]}}, "p_fd_mc", p, prop_se(p, trials), trials));
    }
    rows.push_back(row("sfd_split", {{"ebn0_db", ebn0}}, "argmax_fraction", sweep[best].fraction, 0.0, 0));
    ++eidx;
  }
  return rows;
}

}  // namespace uwbicl
