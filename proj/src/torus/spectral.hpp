#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "torus/grid.hpp"

namespace mfg::spectral {

/// Number of complex modes kept by a real-to-complex transform of a
/// rank-dimensional periodic array with M points per axis.
std::size_t complex_size(int rank, int M);

/// Signed wavenumber of axis index j (j in [0, M)).
inline int wavenumber(int j, int M) { return j <= M / 2 ? j : j - M; }

/// Calls fn(mode_index, k) for every retained complex mode; k holds the signed
/// wavenumbers per axis.
template <class Fn>
void for_each_mode(int rank, int M, Fn&& fn) {
  const int half = M / 2 + 1;
  std::vector<int> idx(std::size_t(rank), 0);
  std::vector<int> k(std::size_t(rank), 0);
  const std::size_t total = complex_size(rank, M);
  for (std::size_t n = 0; n < total; ++n) {
    for (int a = 0; a < rank; ++a) k[a] = (a == rank - 1) ? idx[a] : wavenumber(idx[a], M);
    fn(n, std::span<const int>(k));
    for (int a = rank - 1; a >= 0; --a) {
      const int lim = (a == rank - 1) ? half : M;
      if (++idx[a] < lim) break;
      idx[a] = 0;
    }
  }
}

/// Multiplies the Fourier coefficients of `data` (a rank-dimensional real
/// array, row-major, M points per axis) by a real symbol, in place.
void apply_real_symbol(std::span<double> data, int rank, int M, std::span<const double> symbol);
void apply_complex_symbol(std::span<double> data, int rank, int M, std::span<const std::complex<double>> symbol);

/// Symbol of exp(nu_dt * (sum_j d_j^2 + beta * (sum_j d_j)^2)). The cross part
/// drops Nyquist components so the operator maps real arrays to real arrays.
std::vector<double> heat_symbol(int rank, int M, double nu_dt, double beta = 0.0);

}  // namespace mfg::spectral

namespace mfg {

/// Exact heat semigroup P_{nu_dt} f (Laplacian with unit coefficient).
Field heat_step(const Field& f, double nu_dt);
void heat_step_inplace(Field& f, double nu_dt);

/// Spectral Laplacian.
Field laplacian(const Field& f);

/// g(x) = f(x - shift). Integer multiples of h are exact index rotations;
/// other shifts use trigonometric interpolation.
Field translate(const Field& f, const Vec& shift);

/// Periodic grid convolution (kernel * f)(x) = h^dim sum_y kernel(x - y) f(y).
class Convolver {
 public:
  Convolver() = default;
  explicit Convolver(const Field& kernel);
  Field apply(const Field& f) const;
  const Field& kernel() const { return kernel_; }

 private:
  Field kernel_;
  std::vector<std::complex<double>> symbol_;
};

}  // namespace mfg
