#include "torus/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "common/error.hpp"

namespace mfg {

Grid::Grid(int dim, int points_per_axis) : dim_(dim), M_(points_per_axis) {
  if (dim != 1 && dim != 2) throw InvalidArgument("grid dimension must be 1 or 2, got " + std::to_string(dim));
  if (points_per_axis < 8) throw InvalidArgument("grid needs at least 8 points per axis");
}

Vec Grid::coord(std::size_t n) const {
  if (dim_ == 1) return {double(n) * h(), 0.0};
  return {double(n / M_) * h(), double(n % M_) * h()};
}

void TimeGrid::validate() const {
  if (!(t0 < T)) throw InvalidArgument("time grid needs t0 < T");
  if (steps < 4) throw InvalidArgument("time grid needs at least 4 steps");
}

Field::Field(const Grid& g, std::vector<double> values) : grid_(g), values_(std::move(values)) {
  if (values_.size() != g.size()) throw InvalidArgument("field size does not match grid");
}

double Field::integral() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s * grid_.cell_volume();
}

double Field::mean() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s / double(values_.size());
}

double Field::sup_norm() const {
  double s = 0.0;
  for (double v : values_) s = std::max(s, std::abs(v));
  return s;
}

double Field::dot(const Field& other) const {
  double s = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) s += values_[i] * other.values_[i];
  return s * grid_.cell_volume();
}

bool Field::finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Field& Field::operator+=(const Field& o) {
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

Field& Field::operator-=(const Field& o) {
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

Field& Field::operator*=(double a) {
  for (double& v : values_) v *= a;
  return *this;
}

Field& Field::axpy(double a, const Field& o) {
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += a * o.values_[i];
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double a, Field f) { return f *= a; }

double sup_distance(const Field& a, const Field& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
  return s;
}

Measure::Measure(Field density) : density_(std::move(density)) {
  for (double v : density_.values())
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("measure density must be finite and nonnegative");
  const double mass = density_.integral();
  if (!(mass > 0.0)) throw InvalidArgument("measure has zero mass");
  density_ *= 1.0 / mass;
}

Measure Measure::clip_and_normalize(Field density, double* clipped) {
  double lost = 0.0;
  for (double& v : density.values()) {
    if (!std::isfinite(v)) throw InvalidArgument("measure density is not finite");
    if (v < 0.0) {
      lost -= v;
      v = 0.0;
    }
  }
  if (clipped) *clipped = lost * density.grid().cell_volume();
  return Measure(std::move(density));
}

Measure Measure::uniform(const Grid& g) { return Measure(Field(g, 1.0)); }

Measure Measure::dirac(const Grid& g, std::size_t node) {
  Field f(g, 0.0);
  f[node] = 1.0 / g.cell_volume();
  Measure m;
  m.density_ = std::move(f);
  return m;
}

Measure Measure::wrapped_gaussian(const Grid& g, const Vec& center, double width) {
  if (!(width > 0.0)) throw InvalidArgument("wrapped gaussian width must be positive");
  auto profile = [&](double x, double c) {
    double s = 0.0;
    for (int n = -4; n <= 4; ++n) {
      const double d = x - c + n;
      s += std::exp(-0.5 * d * d / (width * width));
    }
    return s;
  };
  Field f(g);
  for (std::size_t n = 0; n < g.size(); ++n) {
    const Vec x = g.coord(n);
    double v = profile(x[0], center[0]);
    if (g.dim() == 2) v *= profile(x[1], center[1]);
    f[n] = v;
  }
  return Measure(std::move(f));
}

double VectorField::sup_norm() const {
  double s = 0.0;
  const std::size_t n = comp.front().size();
  for (std::size_t i = 0; i < n; ++i) {
    double r2 = 0.0;
    for (const auto& c : comp) r2 += c[i] * c[i];
    s = std::max(s, std::sqrt(r2));
  }
  return s;
}

double torus_delta(double a, double b) {
  double d = b - a;
  d -= std::floor(d + 0.5);
  return d;
}

double torus_distance(const Vec& a, const Vec& b, int dim) {
  double r2 = 0.0;
  for (int k = 0; k < dim; ++k) {
    const double d = torus_delta(a[k], b[k]);
    r2 += d * d;
  }
  return std::sqrt(r2);
}

}  // namespace mfg
