#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "uwbicl/errors.hpp"
#include "uwbicl/harness.hpp"

namespace uwbicl {

namespace {

using nlohmann::json;

class Section {
 public:
  Section(const json& root, const std::string& name) : name_(name) {
    if (root.contains(name)) {
      node_ = &root.at(name);
      if (!node_->is_object()) throw ConfigViolation("section '" + name + "' must be an object");
    }
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    used_.insert(key);
    if (node_ && node_->contains(key)) {
      try {
        out = node_->at(key).get<T>();
      } catch (const json::exception& e) {
        throw ConfigViolation(name_ + "." + key + ": " + e.what());
      }
    }
  }

  void read_scaled(const std::string& key, double& out, double scale) {
    double v = out / scale;
    read(key, v);
    out = v * scale;
  }

  void read_points(const std::string& key, std::vector<Eigen::Vector3d>& out) {
    used_.insert(key);
    if (!node_ || !node_->contains(key)) return;
    std::vector<std::vector<double>> raw;
    read(key, raw);
    out.clear();
    for (const auto& p : raw) {
      if (p.size() != 3) throw ConfigViolation(name_ + "." + key + ": points need three coordinates");
      out.emplace_back(p[0], p[1], p[2]);
    }
  }

  void finish() const {
    if (!node_) return;
    for (const auto& [k, v] : node_->items())
      if (!used_.count(k)) throw ConfigViolation("unknown key '" + name_ + "." + k + "'");
  }

 private:
  std::string name_;
  const json* node_ = nullptr;
  std::set<std::string> used_;
};

}  // namespace

std::vector<double> SplitConfig::grid() const {
  if (!fractions.empty()) return fractions;
  std::vector<double> g;
  for (int k = 0; k <= 22; ++k) g.push_back(0.045 + 0.02 * k);
  return g;
}

void ScenarioConfig::validate() const {
  frame.validate();
  if (network.anchors.size() < 4) throw ConfigViolation("3D localization needs at least four anchors");
  if (network.drift_ppm.size() != network.anchors.size())
    throw ConfigViolation("one drift value per anchor required");
  if (run.trials < 1 || run.full_trials < 1) throw ConfigViolation("trial count must be >= 1");
  if (!(receiver.p_fa > 0.0 && receiver.p_fa < 1.0)) throw ConfigViolation("p_fa must lie in (0, 1)");
  if (!(receiver.sii_sigma_scale > 0.0)) throw ConfigViolation("sii_sigma_scale must be positive");
  if (network.channel != "los" && network.channel != "multipath")
    throw ConfigViolation("channel must be 'los' or 'multipath'");
  if (network.path_loss != "unit" && network.path_loss != "free_space")
    throw ConfigViolation("path_loss must be 'unit' or 'free_space'");
  if (drift.window_symbols <= frame.sfd_symbols) throw ConfigViolation("drift window shorter than the SFD");
  for (int a : track.case1)
    if (a < 0 || a >= static_cast<int>(track.anchors.size())) throw ConfigViolation("track.case1 index out of range");
  for (int a : track.case2)
    if (a < 0 || a >= static_cast<int>(track.anchors.size())) throw ConfigViolation("track.case2 index out of range");
  if (track.select < 2 || track.select > static_cast<int>(track.case2.size()))
    throw ConfigViolation("track.select out of range");
  if (track.anchors.size() > network.drift_ppm.size()) throw ConfigViolation("track anchors need drift values");
  if (!(track.blocked_fraction >= 0.0 && track.blocked_start >= 0.0 && track.blocked_fraction + track.blocked_start <= 1.0))
    throw ConfigViolation("blocked stretch must lie within the path");
  if (track.epochs < 2 || track.runs < 1 || track.burst_symbols < 1 || track.static_symbols <= frame.sfd_symbols)
    throw ConfigViolation("track sizes out of range");
  if (track.epoch_spacing < track.burst_symbols) throw ConfigViolation("epoch spacing shorter than a burst");
  if (!(track.range_jitter >= 0.0)) throw ConfigViolation("range jitter must be non-negative");
  if (!(track.acquisition_window > 0.0)) throw ConfigViolation("acquisition window must be positive");
}

ScenarioConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigViolation(std::string("config parse error: ") + e.what());
  }
  if (!root.is_object()) throw ConfigViolation("config root must be an object");
  static const std::set<std::string> sections{"frame", "network", "receiver", "run",        "roc",  "sfd_split",
                                              "drift", "ber",     "rmse",     "repetition", "track"};
  for (const auto& [k, v] : root.items())
    if (!sections.count(k)) throw ConfigViolation("unknown section '" + k + "'");

  ScenarioConfig c;
  {
    Section s(root, "frame");
    auto& f = c.frame;
    s.read_scaled("pri_ns", f.pri, 1e-9);
    s.read("repetitions", f.repetitions);
    s.read("payload_symbols", f.payload_symbols);
    s.read_scaled("ppm_shift_ns", f.ppm_shift, 1e-9);
    s.read_scaled("chip_time_ns", f.chip_time, 1e-9);
    s.read("pulse_energy", f.pulse_energy);
    s.read("sfd_symbols", f.sfd_symbols);
    s.read("max_sfd_error_rate", f.max_sfd_error_rate);
    s.read("first_symbol_energy_fraction", f.first_symbol_energy_fraction);
    s.read_scaled("pulse_duration_ns", f.pulse_duration, 1e-9);
    s.read_scaled("delay_spread_ns", f.delay_spread, 1e-9);
    s.read_scaled("sample_rate_ghz", f.sample_rate, 1e9);
    s.finish();
  }
  {
    Section s(root, "network");
    auto& n = c.network;
    s.read_points("anchors_m", n.anchors);
    std::vector<double> agent{n.agent.x(), n.agent.y(), n.agent.z()};
    s.read("agent_m", agent);
    if (agent.size() != 3) throw ConfigViolation("network.agent_m needs three coordinates");
    n.agent = {agent[0], agent[1], agent[2]};
    s.read("agent_jitter_m", n.agent_jitter);
    s.read("drift_ppm", n.drift_ppm);
    s.read_scaled("max_offset_ns", n.max_offset, 1e-9);
    s.read_scaled("beacon_sigma_ns", n.beacon_sigma, 1e-9);
    s.read("beacon_count", n.beacon_count);
    s.read("gold_register_length", n.gold_register_length);
    s.read("channel", n.channel);
    s.read("path_loss", n.path_loss);
    s.finish();
  }
  {
    Section s(root, "receiver");
    auto& r = c.receiver;
    s.read("p_fa", r.p_fa);
    s.read("sii_sigma_scale", r.sii_sigma_scale);
    s.read("resync_horizon", r.resync_horizon);
    s.read("candidate_floor", r.candidate_floor);
    s.read("slot_tolerance_samples", r.slot_tolerance);
    s.finish();
  }
  {
    Section s(root, "run");
    s.read("trials", c.run.trials);
    s.read("full_trials", c.run.full_trials);
    s.read("seed", c.run.seed);
    s.finish();
  }
  {
    Section s(root, "roc");
    s.read("ebn0_db", c.roc.ebn0_db);
    s.read("repetitions", c.roc.repetitions);
    s.read("repetitions_grid", c.roc.repetitions_grid);
    s.read("fixed_ebn0_db", c.roc.fixed_ebn0_db);
    s.read("p_fa", c.roc.p_fa);
    s.read("interferers", c.roc.interferers);
    s.finish();
  }
  {
    Section s(root, "sfd_split");
    s.read("ebn0_db", c.sfd_split.ebn0_db);
    s.read("fractions", c.sfd_split.fractions);
    s.read("interferers", c.sfd_split.interferers);
    s.finish();
  }
  {
    Section s(root, "drift");
    s.read("ebn0_db", c.drift.ebn0_db);
    s.read("c_thres", c.drift.c_thres);
    s.read("window_symbols", c.drift.window_symbols);
    s.finish();
  }
  {
    Section s(root, "ber");
    s.read("ebn0_db", c.ber.ebn0_db);
    s.read("c_thres", c.ber.c_thres);
    s.finish();
  }
  {
    Section s(root, "rmse");
    s.read("ebn0_db", c.rmse.ebn0_db);
    s.read("c_thres", c.rmse.c_thres);
    s.finish();
  }
  {
    Section s(root, "repetition");
    s.read("ebn0_db", c.repetition.ebn0_db);
    s.read("base_repetitions", c.repetition.base_repetitions);
    s.read("c_thres", c.repetition.c_thres);
    s.finish();
  }
  {
    Section s(root, "track");
    auto& t = c.track;
    s.read_points("anchors_m", t.anchors);
    s.read("case1", t.case1);
    s.read("case2", t.case2);
    s.read("blocked_anchor", t.blocked_anchor);
    s.read("blocked_fraction", t.blocked_fraction);
    s.read("blocked_start", t.blocked_start);
    s.read("blocked_direct_gain", t.blocked_direct_gain);
    s.read_scaled("reflection_delay_ns", t.reflection_delay, 1e-9);
    s.read("reflection_gain", t.reflection_gain);
    s.read("ebn0_db", t.ebn0_db);
    s.read("repetitions", t.repetitions);
    s.read("static_symbols", t.static_symbols);
    s.read("epochs", t.epochs);
    s.read("epoch_spacing", t.epoch_spacing);
    std::vector<double> center{t.path_center.x(), t.path_center.y()};
    std::vector<double> radii{t.path_radii.x(), t.path_radii.y()};
    s.read("path_center_m", center);
    s.read("path_radii_m", radii);
    if (center.size() != 2 || radii.size() != 2) throw ConfigViolation("track path vectors need two entries");
    t.path_center = {center[0], center[1]};
    t.path_radii = {radii[0], radii[1]};
    s.read_scaled("range_jitter_ps", t.range_jitter, 1e-12);
    s.read_scaled("acquisition_window_ns", t.acquisition_window, 1e-9);
    s.read("burst_symbols", t.burst_symbols);
    s.read("c_thres", t.c_thres);
    s.read("runs", t.runs);
    s.read("select", t.select);
    s.finish();
  }
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace uwbicl
