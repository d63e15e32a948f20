#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "uwbicl/harness.hpp"

namespace uwbicl {

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  std::vector<std::string> cols;
  for (const auto& r : rows)
    for (const auto& [k, v] : r.sweep)
      if (std::find(cols.begin(), cols.end(), k) == cols.end()) cols.push_back(k);
  os << "experiment";
  for (const auto& c : cols) os << ',' << c;
  os << ",metric,value,stderr,trials\n";
  os << std::setprecision(10);
  for (const auto& r : rows) {
    os << r.experiment;
    for (const auto& c : cols) {
      os << ',';
      for (const auto& [k, v] : r.sweep)
        if (k == c) os << v;
    }
    os << ',' << r.metric << ',' << r.value << ',' << r.stderr_ << ',' << r.trials << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_csv(out, rows);
}

void write_trajectory(const std::filesystem::path& path, const std::vector<TrajectoryPoint>& pts) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "epoch,true_x,true_y,est_x,est_y\n" << std::setprecision(10);
  for (const auto& p : pts)
    out << p.epoch << ',' << p.truth.x() << ',' << p.truth.y() << ',' << p.estimate.x() << ','
        << p.estimate.y() << '\n';
}

}  // namespace uwbicl
