#include "torus/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <tuple>
#include <utility>

#include "common/error.hpp"

namespace mfg::spectral {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Plans plus aligned scratch buffers for one (rank, M) shape. FFTW planning is
// not thread safe, so creation and destruction take the planner lock; each
// thread keeps its own cache.
struct Plan {
  int rank = 0;
  int M = 0;
  std::size_t nreal = 0;
  std::size_t ncomplex = 0;
  double* rbuf = nullptr;
  fftw_complex* cbuf = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;

  Plan(int r, int m) : rank(r), M(m) {
    nreal = 1;
    for (int a = 0; a < r; ++a) nreal *= std::size_t(m);
    ncomplex = complex_size(r, m);
    std::vector<int> dims(std::size_t(r), m);
    std::lock_guard lock(planner_mutex());
    rbuf = fftw_alloc_real(nreal);
    cbuf = fftw_alloc_complex(ncomplex);
    if (!rbuf || !cbuf) throw BudgetExceeded("cannot allocate spectral scratch buffers");
    fwd = fftw_plan_dft_r2c(r, dims.data(), rbuf, cbuf, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r(r, dims.data(), cbuf, rbuf, FFTW_ESTIMATE);
  }
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
    fftw_free(rbuf);
    fftw_free(cbuf);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
};

Plan& plan_for(int rank, int M) {
  thread_local std::map<std::pair<int, int>, std::unique_ptr<Plan>> cache;
  auto& slot = cache[{rank, M}];
  if (!slot) slot = std::make_unique<Plan>(rank, M);
  return *slot;
}

template <class Mult>
void apply_symbol(std::span<double> data, int rank, int M, Mult&& mult) {
  Plan& p = plan_for(rank, M);
  if (data.size() != p.nreal) throw InvalidArgument("spectral data size does not match shape");
  std::memcpy(p.rbuf, data.data(), p.nreal * sizeof(double));
  fftw_execute(p.fwd);
  auto* c = reinterpret_cast<std::complex<double>*>(p.cbuf);
  for (std::size_t n = 0; n < p.ncomplex; ++n) mult(n, c[n]);
  fftw_execute(p.inv);
  const double scale = 1.0 / double(p.nreal);
  for (std::size_t i = 0; i < p.nreal; ++i) data[i] = p.rbuf[i] * scale;
}

}  // namespace

std::size_t complex_size(int rank, int M) {
  std::size_t n = std::size_t(M / 2 + 1);
  for (int a = 0; a + 1 < rank; ++a) n *= std::size_t(M);
  return n;
}

void apply_real_symbol(std::span<double> data, int rank, int M, std::span<const double> symbol) {
  if (symbol.size() != complex_size(rank, M)) throw InvalidArgument("symbol size mismatch");
  apply_symbol(data, rank, M, [&](std::size_t n, std::complex<double>& c) { c *= symbol[n]; });
}

void apply_complex_symbol(std::span<double> data, int rank, int M, std::span<const std::complex<double>> symbol) {
  if (symbol.size() != complex_size(rank, M)) throw InvalidArgument("symbol size mismatch");
  apply_symbol(data, rank, M, [&](std::size_t n, std::complex<double>& c) { c *= symbol[n]; });
}

std::vector<double> heat_symbol(int rank, int M, double nu_dt, double beta) {
  std::vector<double> sym(complex_size(rank, M));
  const double c = 4.0 * std::numbers::pi * std::numbers::pi * nu_dt;
  for_each_mode(rank, M, [&](std::size_t n, std::span<const int> k) {
    double k2 = 0.0;
    int ksum = 0;
    for (int kj : k) {
      k2 += double(kj) * kj;
      if (2 * std::abs(kj) != M) ksum += kj;
    }
    sym[n] = std::exp(-c * (k2 + beta * double(ksum) * ksum));
  });
  return sym;
}

}  // namespace mfg::spectral

namespace mfg {

namespace {

const std::vector<double>& cached_heat_symbol(int rank, int M, double nu_dt) {
  struct Key {
    int rank, M;
    double nu;
    bool operator<(const Key& o) const {
      return std::tie(rank, M, nu) < std::tie(o.rank, o.M, o.nu);
    }
  };
  thread_local std::map<Key, std::vector<double>> cache;
  Key key{rank, M, nu_dt};
  auto it = cache.find(key);
  if (it == cache.end()) {
    if (cache.size() > 64) cache.clear();
    it = cache.emplace(key, spectral::heat_symbol(rank, M, nu_dt)).first;
  }
  return it->second;
}

}  // namespace

void heat_step_inplace(Field& f, double nu_dt) {
  if (nu_dt < 0.0) throw InvalidArgument("heat_step needs nu_dt >= 0");
  if (nu_dt == 0.0) return;
  const Grid& g = f.grid();
  spectral::apply_real_symbol(f.values(), g.dim(), g.points(), cached_heat_symbol(g.dim(), g.points(), nu_dt));
}

Field heat_step(const Field& f, double nu_dt) {
  Field out = f;
  heat_step_inplace(out, nu_dt);
  return out;
}

Field laplacian(const Field& f) {
  const Grid& g = f.grid();
  std::vector<double> sym(spectral::complex_size(g.dim(), g.points()));
  const double c = -4.0 * std::numbers::pi * std::numbers::pi;
  spectral::for_each_mode(g.dim(), g.points(), [&](std::size_t n, std::span<const int> k) {
    double k2 = 0.0;
    for (int kj : k) k2 += double(kj) * kj;
    sym[n] = c * k2;
  });
  Field out = f;
  spectral::apply_real_symbol(out.values(), g.dim(), g.points(), sym);
  return out;
}

Field translate(const Field& f, const Vec& shift) {
  const Grid& g = f.grid();
  const int M = g.points();
  std::array<double, 2> steps{0.0, 0.0};
  bool integral = true;
  for (int a = 0; a < g.dim(); ++a) {
    steps[a] = shift[a] * M;
    if (std::abs(steps[a] - std::round(steps[a])) > 1e-9) integral = false;
  }
  if (integral) {
    Field out(g);
    const int s0 = int(std::lround(steps[0]));
    if (g.dim() == 1) {
      for (int i = 0; i < M; ++i) out[g.index(i)] = f[g.index(i - s0)];
    } else {
      const int s1 = int(std::lround(steps[1]));
      for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j) out[g.index(i, j)] = f[g.index(i - s0, j - s1)];
    }
    return out;
  }
  std::vector<std::complex<double>> sym(spectral::complex_size(g.dim(), M));
  const double two_pi = 2.0 * std::numbers::pi;
  spectral::for_each_mode(g.dim(), M, [&](std::size_t n, std::span<const int> k) {
    std::complex<double> m{1.0, 0.0};
    for (int a = 0; a < g.dim(); ++a) {
      if (2 * std::abs(k[a]) == M)
        m *= std::cos(two_pi * k[a] * shift[a]);
      else
        m *= std::polar(1.0, -two_pi * k[a] * shift[a]);
    }
    sym[n] = m;
  });
  Field out = f;
  spectral::apply_complex_symbol(out.values(), g.dim(), M, sym);
  return out;
}

Convolver::Convolver(const Field& kernel) : kernel_(kernel) {
  const Grid& g = kernel.grid();
  const std::size_t nc = spectral::complex_size(g.dim(), g.points());
  // Direct DFT, done once per kernel.
  symbol_.assign(nc, {0.0, 0.0});
  const int M = g.points();
  const double two_pi = 2.0 * std::numbers::pi;
  spectral::for_each_mode(g.dim(), M, [&](std::size_t n, std::span<const int> k) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t p = 0; p < g.size(); ++p) {
      const Vec x = g.coord(p);
      double phase = 0.0;
      for (int a = 0; a < g.dim(); ++a) phase += k[a] * x[a];
      acc += kernel[p] * std::polar(1.0, -two_pi * phase);
    }
    symbol_[n] = acc * g.cell_volume();
  });
}

Field Convolver::apply(const Field& f) const {
  Field out = f;
  const Grid& g = f.grid();
  spectral::apply_complex_symbol(out.values(), g.dim(), g.points(), symbol_);
  return out;
}

}  // namespace mfg
