#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace mfg {

using Vec = std::array<double, 2>;  // unused components stay zero in dim 1

/// Uniform periodic grid on the unit torus of dimension 1 or 2. Node k sits
/// at k*h; all indexing wraps modulo M. Storage is row-major with the last
/// axis fastest.
class Grid {
 public:
  Grid() = default;
  Grid(int dim, int points_per_axis);

  int dim() const { return dim_; }
  int points() const { return M_; }
  double h() const { return 1.0 / M_; }
  double cell_volume() const { return dim_ == 1 ? h() : h() * h(); }
  std::size_t size() const { return dim_ == 1 ? std::size_t(M_) : std::size_t(M_) * M_; }

  static int wrap(int k, int M) { return ((k % M) + M) % M; }
  std::size_t index(int i) const { return std::size_t(wrap(i, M_)); }
  std::size_t index(int i, int j) const {
    return std::size_t(wrap(i, M_)) * M_ + std::size_t(wrap(j, M_));
  }
  /// Node coordinates of flat index `n`.
  Vec coord(std::size_t n) const;
  /// Stride of axis a in the flat layout.
  std::size_t stride(int axis) const { return (dim_ == 2 && axis == 0) ? std::size_t(M_) : 1; }

  bool operator==(const Grid&) const = default;

 private:
  int dim_ = 1;
  int M_ = 8;
};

/// Uniform time grid t0 < ... < T with `steps` intervals.
struct TimeGrid {
  double t0 = 0.0;
  double T = 1.0;
  int steps = 4;

  double dt() const { return (T - t0) / steps; }
  double time(int s) const { return t0 + s * dt(); }
  void validate() const;
};

/// Periodic scalar field on a grid (u, v, test functions, signed measures).
class Field {
 public:
  Field() = default;
  explicit Field(const Grid& g, double value = 0.0) : grid_(g), values_(g.size(), value) {}
  Field(const Grid& g, std::vector<double> values);

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::vector<double>& raw() { return values_; }
  const std::vector<double>& raw() const { return values_; }

  /// Sum of values times the cell volume (total mass for densities).
  double integral() const;
  double mean() const;
  double sup_norm() const;
  /// Quadrature of this field against another density: sum f*g*h^dim.
  double dot(const Field& other) const;
  bool finite() const;

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(double a);
  /// this += a * o
  Field& axpy(double a, const Field& o);

 private:
  Grid grid_;
  std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double a, Field f);
double sup_distance(const Field& a, const Field& b);

/// Probability density on the grid: nonnegative with unit mass (within 1e-12).
class Measure {
 public:
  Measure() = default;
  /// Validates nonnegativity and renormalizes the mass to 1. Throws
  /// InvalidArgument on negative or non-finite entries or zero mass.
  explicit Measure(Field density);
  /// Clips negative entries to zero, then renormalizes. Returns the clipped
  /// mass through `clipped` when provided.
  static Measure clip_and_normalize(Field density, double* clipped = nullptr);

  static Measure uniform(const Grid& g);
  /// Unit mass on a single node (height 1/h^dim).
  static Measure dirac(const Grid& g, std::size_t node);
  /// Wrapped Gaussian sampled at the nodes (per-axis product in dim 2).
  static Measure wrapped_gaussian(const Grid& g, const Vec& center, double width);

  const Grid& grid() const { return density_.grid(); }
  const Field& density() const { return density_; }
  double operator[](std::size_t i) const { return density_[i]; }
  std::size_t size() const { return density_.size(); }

 private:
  Field density_;
};

/// Vector field: one component Field per axis.
struct VectorField {
  std::vector<Field> comp;

  VectorField() = default;
  explicit VectorField(const Grid& g, double value = 0.0) : comp(std::size_t(g.dim()), Field(g, value)) {}
  const Grid& grid() const { return comp.front().grid(); }
  Vec at(std::size_t n) const {
    Vec v{0.0, 0.0};
    for (std::size_t a = 0; a < comp.size(); ++a) v[a] = comp[a][n];
    return v;
  }
  void set(std::size_t n, const Vec& v) {
    for (std::size_t a = 0; a < comp.size(); ++a) comp[a][n] = v[a];
  }
  double sup_norm() const;
};

/// Shortest signed displacement on the unit circle, in [-1/2, 1/2).
double torus_delta(double a, double b);
double torus_distance(const Vec& a, const Vec& b, int dim);

}  // namespace mfg
