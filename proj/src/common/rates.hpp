#pragma once

#include <span>
#include <string>
#include <vector>

namespace mfg {

struct RateRow {
  double N = 0.0;
  double error = 0.0;
  double stderr_ = 0.0;
  double runtime = 0.0;
};

/// Least-squares line through (log N, log error).
struct SlopeFit {
  bool degenerate = false;  // fewer than 3 positive rows or no spread in N
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_ = 0.0;     // standard error of the slope (0 for 3 exact points)
  std::string marker() const { return degenerate ? "degenerate" : "ok"; }
};

SlopeFit fit_slope(std::span<const RateRow> rows);
SlopeFit fit_slope(std::span<const double> N, std::span<const double> error);

}  // namespace mfg
