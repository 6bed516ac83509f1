#include "common/rates.hpp"

#include <cmath>

namespace mfg {

SlopeFit fit_slope(std::span<const double> N, std::span<const double> error) {
  SlopeFit fit;
  std::vector<double> x, y;
  for (std::size_t k = 0; k < N.size() && k < error.size(); ++k) {
    if (!(N[k] > 0.0) || !(error[k] > 0.0) || !std::isfinite(error[k])) continue;
    x.push_back(std::log(N[k]));
    y.push_back(std::log(error[k]));
  }
  const std::size_t n = x.size();
  if (n < 3 || n != N.size()) {
    fit.degenerate = true;
    return fit;
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  if (sxx <= 0.0) {
    fit.degenerate = true;
    return fit;
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = y[k] - fit.intercept - fit.slope * x[k];
    sse += r * r;
  }
  fit.stderr_ = n > 2 ? std::sqrt(sse / double(n - 2) / sxx) : 0.0;
  return fit;
}

SlopeFit fit_slope(std::span<const RateRow> rows) {
  std::vector<double> N, e;
  for (const auto& r : rows) {
    N.push_back(r.N);
    e.push_back(r.error);
  }
  return fit_slope(N, e);
}

}  // namespace mfg
