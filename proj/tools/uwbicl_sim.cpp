#include <chrono>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "uwbicl/harness.hpp"

namespace fs = std::filesystem;
using namespace uwbicl;

int main(int argc, char** argv) {
  CLI::App app{"IR-UWB downlink ICL simulator"};
  app.require_subcommand(1);
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int trials = 0;
  std::string out_dir = "results";
  bool full = false;
  app.add_option("--config", config_path, "scenario config (JSON)")->check(CLI::ExistingFile);
  app.add_option_function<std::uint64_t>("--seed", [&](std::uint64_t s) { seed = s; seed_set = true; }, "master seed");
  app.add_option("--trials", trials, "Monte Carlo trials per grid point")->check(CLI::PositiveNumber);
  app.add_option("--out", out_dir, "output directory");
  app.add_flag("--full", full, "use the full trial count");
  app.fallthrough();

  const std::vector<std::string> names{"roc", "sfd-split", "drift", "ber", "rmse", "track", "all"};
  for (const auto& n : names) app.add_subcommand(n, "run the " + n + " experiment");

  CLI11_PARSE(app, argc, argv);

  try {
    ScenarioConfig cfg = config_path.empty() ? ScenarioConfig{} : load_config(config_path);
    if (seed_set) cfg.run.seed = seed;
    if (trials > 0) {
      cfg.run.trials = trials;
      cfg.run.full_trials = trials;
    }
    cfg.run.full = full;
    cfg.validate();
    fs::create_directories(out_dir);
    const auto chosen = app.get_subcommands().front()->get_name();
    auto want = [&](const std::string& n) { return chosen == n || chosen == "all"; };
    auto timed = [&](const std::string& n, auto&& fn) {
      const auto t0 = std::chrono::steady_clock::now();
      fn();
      const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::cerr << n << ": " << s << " s\n";
    };
    if (want("roc")) timed("roc", [&] { write_csv(fs::path(out_dir) / "roc.csv", run_roc(cfg)); });
    if (want("sfd-split")) timed("sfd-split", [&] { write_csv(fs::path(out_dir) / "sfd_split.csv", run_sfd_split(cfg)); });
    if (want("drift")) timed("drift", [&] { write_csv(fs::path(out_dir) / "drift.csv", run_drift(cfg)); });
    if (want("ber"))
      timed("ber", [&] {
        auto rows = run_ber(cfg);
        const auto rep = run_repetition(cfg);
        rows.insert(rows.end(), rep.begin(), rep.end());
        write_csv(fs::path(out_dir) / "ber.csv", rows);
      });
    if (want("rmse")) timed("rmse", [&] { write_csv(fs::path(out_dir) / "rmse.csv", run_rmse(cfg)); });
    if (want("track"))
      timed("track", [&] {
        const auto t = run_tracking(cfg);
        write_csv(fs::path(out_dir) / "track.csv", t.rows);
        for (const auto& [name, pts] : t.trajectories) write_trajectory(fs::path(out_dir) / (name + ".csv"), pts);
      });
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
