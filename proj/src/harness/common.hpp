#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "uwbicl/harness.hpp"

namespace uwbicl::detail {

struct Mean {
  double sum = 0.0;
  double sum2 = 0.0;
  long n = 0;

  void add(double x) {
    sum += x;
    sum2 += x * x;
    ++n;
  }
  void merge(const Mean& o) {
    sum += o.sum;
    sum2 += o.sum2;
    n += o.n;
  }
  double mean() const { return n ? sum / n : 0.0; }
  double se() const {
    if (n < 2) return 0.0;
    const double m = mean();
    return std::sqrt(std::max(0.0, (sum2 / n - m * m)) / (n - 1));
  }
};

// Root of a mean of squares, with a delta-method standard error.
struct Rms {
  Mean sq;
  void add(double e) { sq.add(e * e); }
  void merge(const Rms& o) { sq.merge(o.sq); }
  double value() const { return std::sqrt(sq.mean()); }
  double se() const {
    const double v = value();
    return v > 0.0 ? sq.se() / (2.0 * v) : 0.0;
  }
  long n() const { return sq.n; }
};

inline double prop_se(double p, long n) { return n > 0 ? std::sqrt(std::max(p * (1.0 - p), 0.0) / n) : 0.0; }

inline ResultRow row(const std::string& exp, std::vector<std::pair<std::string, double>> sweep,
                     const std::string& metric, double value, double se, long trials) {
  return ResultRow{exp, std::move(sweep), metric, value, se, trials};
}

}  // namespace uwbicl::detail
