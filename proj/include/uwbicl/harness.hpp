#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "uwbicl/waveform.hpp"

namespace uwbicl {

struct NetworkConfig {
  std::vector<Eigen::Vector3d> anchors{{2, 5, 2}, {4, 8, 3}, {5, 5, 3}, {7, 3, 2}};  // m
  Eigen::Vector3d agent{4.5, 5.0, 1.2};  // m
  double agent_jitter = 0.5;             // m, half-width of the per-trial box
  std::vector<double> drift_ppm{20, 10, 30, 20};
  double max_offset = 1e-6;              // s
  double beacon_sigma = 0.1e-9;          // s
  int beacon_count = 100;
  int gold_register_length = 7;
  std::string channel = "los";           // los | multipath
  std::string path_loss = "unit";        // unit | free_space
};

struct ReceiverConfig {
  double p_fa = 1e-3;
  double sii_sigma_scale = 14.0;
  int resync_horizon = 8;
  double candidate_floor = 0.3;
  int slot_tolerance = 2;  // samples
};

struct RunConfig {
  int trials = 2000;
  int full_trials = 100000;
  bool full = false;
  std::uint64_t seed = 1;

  int effective_trials() const { return full ? full_trials : trials; }
};

struct RocConfig {
  std::vector<double> ebn0_db{7, 9, 11};
  int repetitions = 3;
  std::vector<int> repetitions_grid{1, 3};
  double fixed_ebn0_db = 11;
  std::vector<double> p_fa{1e-6, 1e-5, 1e-4, 1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 1.0};
  int interferers = 3;
};

struct SplitConfig {
  std::vector<double> ebn0_db{7, 9, 11};
  std::vector<double> fractions;  // empty: 0.045, 0.065, ..., 0.485
  int interferers = 0;
  std::vector<double> grid() const;
};

struct DriftConfig {
  std::vector<double> ebn0_db{15};
  std::vector<double> c_thres{0.5, 0.6, 0.7, 0.8, 0.85, 0.9, 0.92, 0.94, 0.95};
  int window_symbols = 512;
};

struct BerConfig {
  std::vector<double> ebn0_db{11};
  std::vector<double> c_thres{0.0, 0.3, 0.5, 0.7, 0.85, 0.88, 0.9, 0.92, 0.94, 0.96, 0.98, 0.99, 0.993, 0.996};
};

struct RmseConfig {
  std::vector<double> ebn0_db{16};
  std::vector<double> c_thres{0.5, 0.7, 0.85, 0.9, 0.92, 0.94, 0.96, 0.98, 0.99, 0.996};
};

// Same per-symbol energy spent either on twice the repetitions or on 3 dB
// more pulse energy; ebn0_db is the per-symbol value shared by both.
struct RepetitionConfig {
  std::vector<double> ebn0_db{11, 13};
  int base_repetitions = 1;
  double c_thres = 0.95;
};

struct TrackConfig {
  std::vector<Eigen::Vector3d> anchors{{0, 3.6, 0}, {0, 1.8, 0}, {0, 0, 0}, {7.2, 1.8, 0}};  // m
  std::vector<int> case1{0, 1, 2};
  std::vector<int> case2{0, 2, 3};
  int blocked_anchor = 2;
  double blocked_fraction = 0.2;  // contiguous share of the epochs
  double blocked_start = 0.4;     // position of that stretch along the path
  double blocked_direct_gain = 0.1;
  double reflection_delay = 2e-9;  // s
  double reflection_gain = 0.35;
  double ebn0_db = 16;
  int repetitions = 3;
  int static_symbols = 1024;
  int epochs = 100;
  int epoch_spacing = 8;     // symbol slots between fixes
  Eigen::Vector2d path_center{2.4, 1.8};  // m, elliptical path, one lap per run
  Eigen::Vector2d path_radii{0.8, 0.5};   // m
  double range_jitter = 100e-12;          // s, per link and epoch
  double acquisition_window = 5e-9;       // s, half-width around each predicted arrival
  int burst_symbols = 8;
  double c_thres = 0.92;
  int runs = 5;
  int select = 2;
};

struct ScenarioConfig {
  FrameConfig frame;
  NetworkConfig network;
  ReceiverConfig receiver;
  RunConfig run;
  RocConfig roc;
  SplitConfig sfd_split;
  DriftConfig drift;
  BerConfig ber;
  RmseConfig rmse;
  RepetitionConfig repetition;
  TrackConfig track;

  void validate() const;
};

ScenarioConfig load_config(const std::filesystem::path& path);
ScenarioConfig parse_config(const std::string& text);

struct ResultRow {
  std::string experiment;
  std::vector<std::pair<std::string, double>> sweep;
  std::string metric;
  double value = 0.0;
  double stderr_ = 0.0;
  long trials = 0;
};

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows);
void write_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows);

// Monte Carlo decision variables of a known-position symbol run.
struct DecisionStats {
  long trials = 0;
  std::vector<long> hits;  // per symbol, decision value above threshold
  long all_tail = 0;       // trials with >= N_suc tail hits and a first-symbol hit
};

std::vector<ResultRow> run_roc(const ScenarioConfig& cfg);
std::vector<ResultRow> run_sfd_split(const ScenarioConfig& cfg);
std::vector<ResultRow> run_drift(const ScenarioConfig& cfg);
std::vector<ResultRow> run_ber(const ScenarioConfig& cfg);
std::vector<ResultRow> run_rmse(const ScenarioConfig& cfg);
std::vector<ResultRow> run_repetition(const ScenarioConfig& cfg);

struct TrajectoryPoint {
  int epoch = 0;
  Eigen::Vector2d truth;
  Eigen::Vector2d estimate;
};

struct TrackingOutput {
  std::vector<ResultRow> rows;
  std::vector<std::pair<std::string, std::vector<TrajectoryPoint>>> trajectories;
};

TrackingOutput run_tracking(const ScenarioConfig& cfg);
void write_trajectory(const std::filesystem::path& path, const std::vector<TrajectoryPoint>& pts);

// Single-symbol Monte Carlo detection rate at the true decision instant.
struct PdPoint {
  double analytic = 0.0;
  double empirical = 0.0;
  long trials = 0;
};
PdPoint pd_monte_carlo(const ScenarioConfig& cfg, int repetitions, double ebn0_db, int interferers,
                       long trials, std::uint64_t seed);

// Noise-only CFAR check over independent single-instant windows.
struct FalseAlarmPoint {
  long windows = 0;
  long alarms = 0;
};
FalseAlarmPoint false_alarm_monte_carlo(const ScenarioConfig& cfg, long windows, std::uint64_t seed);

// Full SFD acquisition by scanning, without interferers.
struct SfdMcPoint {
  long trials = 0;
  long detected = 0;      // locked within two samples of the true first symbol
  long first_hits = 0;    // first-symbol peak above threshold near the truth
  std::vector<long> tail_hits;
};
SfdMcPoint sfd_monte_carlo(const ScenarioConfig& cfg, double ebn0_db, long trials, std::uint64_t seed);

}  // namespace uwbicl
