#include "torus/operators.hpp"

#include <algorithm>
#include <cmath>

#include "common/error.hpp"

namespace mfg {

namespace {

// Visits the nodes of each axis line: fn(flat index of node k, flat index of k+1).
template <class Fn>
void for_each_forward_pair(const Grid& g, int axis, Fn&& fn) {
  const int M = g.points();
  if (g.dim() == 1) {
    for (int k = 0; k < M; ++k) fn(g.index(k), g.index(k + 1));
    return;
  }
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      if (axis == 0)
        fn(g.index(i, j), g.index(i + 1, j));
      else
        fn(g.index(i, j), g.index(i, j + 1));
    }
}

struct Stencil {
  std::array<std::size_t, 4> node{};
  std::array<double, 4> weight{};
  int count = 0;
};

Stencil bilinear(const Grid& g, const Vec& x) {
  const int M = g.points();
  Stencil s;
  std::array<int, 2> base{0, 0};
  std::array<double, 2> frac{0.0, 0.0};
  for (int a = 0; a < g.dim(); ++a) {
    if (!std::isfinite(x[a])) throw InvalidArgument("interpolation point is not finite");
    double y = (x[a] - std::floor(x[a])) * M;
    double fl = std::floor(y);
    base[a] = int(fl);
    frac[a] = y - fl;
  }
  if (g.dim() == 1) {
    s.node[0] = g.index(base[0]);
    s.node[1] = g.index(base[0] + 1);
    s.weight[0] = 1.0 - frac[0];
    s.weight[1] = frac[0];
    s.count = 2;
    return s;
  }
  int c = 0;
  for (int di = 0; di < 2; ++di)
    for (int dj = 0; dj < 2; ++dj) {
      s.node[c] = g.index(base[0] + di, base[1] + dj);
      s.weight[c] = (di ? frac[0] : 1.0 - frac[0]) * (dj ? frac[1] : 1.0 - frac[1]);
      ++c;
    }
  s.count = 4;
  return s;
}

}  // namespace

VectorField gradient(const Field& f) {
  const Grid& g = f.grid();
  VectorField out(g);
  const double inv2h = 0.5 / g.h();
  for (int a = 0; a < g.dim(); ++a) {
    Field& c = out.comp[a];
    // Accumulate +f[k+1] at k and -f[k] at k+1.
    for_each_forward_pair(g, a, [&](std::size_t k, std::size_t kp) {
      c[k] += f[kp] * inv2h;
      c[kp] -= f[k] * inv2h;
    });
  }
  return out;
}

Field divergence(const VectorField& v) {
  const Grid& g = v.grid();
  Field out(g);
  const double inv2h = 0.5 / g.h();
  for (int a = 0; a < g.dim(); ++a) {
    const Field& c = v.comp[a];
    for_each_forward_pair(g, a, [&](std::size_t k, std::size_t kp) {
      out[k] += c[kp] * inv2h;
      out[kp] -= c[k] * inv2h;
    });
  }
  return out;
}

Field div_upwind_flux(const Field& m, const VectorField& b) {
  const Grid& g = m.grid();
  Field out(g);
  const double invh = 1.0 / g.h();
  for (int a = 0; a < g.dim(); ++a) {
    const Field& ba = b.comp[a];
    for_each_forward_pair(g, a, [&](std::size_t k, std::size_t kp) {
      const double vel = -0.5 * (ba[k] + ba[kp]);
      const double flux = vel >= 0.0 ? vel * m[k] : vel * m[kp];
      out[k] -= flux * invh;
      out[kp] += flux * invh;
    });
  }
  return out;
}

Field div_upwind_flux_dir(const Field& m, const VectorField& b, const VectorField& db) {
  const Grid& g = m.grid();
  Field out(g);
  const double invh = 1.0 / g.h();
  for (int a = 0; a < g.dim(); ++a) {
    const Field& ba = b.comp[a];
    const Field& da = db.comp[a];
    for_each_forward_pair(g, a, [&](std::size_t k, std::size_t kp) {
      const double vel = -0.5 * (ba[k] + ba[kp]);
      const double dvel = -0.5 * (da[k] + da[kp]);
      const double flux = vel >= 0.0 ? dvel * m[k] : dvel * m[kp];
      out[k] -= flux * invh;
      out[kp] += flux * invh;
    });
  }
  return out;
}

double max_axis_speed(const VectorField& b) {
  double s = 0.0;
  const std::size_t n = b.comp.front().size();
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0.0;
    for (const auto& c : b.comp) r += std::abs(c[i]);
    s = std::max(s, r);
  }
  return s;
}

double interp(const Field& f, const Vec& x) {
  const Stencil s = bilinear(f.grid(), x);
  double v = 0.0;
  for (int c = 0; c < s.count; ++c) v += s.weight[c] * f[s.node[c]];
  return v;
}

Vec interp(const VectorField& v, const Vec& x) {
  const Stencil s = bilinear(v.grid(), x);
  Vec out{0.0, 0.0};
  for (std::size_t a = 0; a < v.comp.size(); ++a)
    for (int c = 0; c < s.count; ++c) out[a] += s.weight[c] * v.comp[a][s.node[c]];
  return out;
}

void splat(Field& density, const Vec& x, double w) {
  const Grid& g = density.grid();
  const Stencil s = bilinear(g, x);
  const double scale = w / g.cell_volume();
  for (int c = 0; c < s.count; ++c) density[s.node[c]] += s.weight[c] * scale;
}

Measure deposit(const Grid& g, std::span<const Vec> points, std::span<const double> weights) {
  if (points.empty()) throw InvalidArgument("deposit needs at least one point");
  if (weights.size() != points.size()) throw InvalidArgument("deposit weights and points differ in length");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw InvalidArgument("deposit weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("deposit weights must sum to 1");
  Field f(g);
  for (std::size_t p = 0; p < points.size(); ++p) splat(f, points[p], weights[p]);
  return Measure(std::move(f));
}

Measure deposit(const Grid& g, std::span<const Vec> points) {
  std::vector<double> w(points.size(), points.empty() ? 0.0 : 1.0 / double(points.size()));
  return deposit(g, points, w);
}

Measure push_forward(const Measure& m, const VectorField& phi, double scale) {
  const Grid& g = m.grid();
  Field f(g);
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (m[n] == 0.0) continue;
    Vec x = g.coord(n);
    const Vec p = phi.at(n);
    for (int a = 0; a < g.dim(); ++a) x[a] += scale * p[a];
    splat(f, x, m[n] * g.cell_volume());
  }
  return Measure(std::move(f));
}

Measure shift_measure(const Measure& m, const Vec& a) {
  const Grid& g = m.grid();
  VectorField phi(g);
  for (std::size_t n = 0; n < g.size(); ++n) phi.set(n, a);
  return push_forward(m, phi, 1.0);
}

}  // namespace mfg
