#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "common/error.hpp"
#include "torus/grid.hpp"
#include "torus/operators.hpp"
#include "torus/snapshot.hpp"
#include "torus/spectral.hpp"
#include "torus/wasserstein.hpp"

using namespace mfg;
using std::numbers::pi;

namespace {

Field sample(const Grid& g, auto fn) {
  Field f(g);
  for (std::size_t n = 0; n < g.size(); ++n) f[n] = fn(g.coord(n));
  return f;
}

Field random_field(const Grid& g, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> U(lo, hi);
  Field f(g);
  for (double& v : f.values()) v = U(rng);
  return f;
}

Measure random_measure(const Grid& g, std::mt19937_64& rng) { return Measure(random_field(g, rng, 0.0, 1.0)); }

}  // namespace

TEST_CASE("heat_step matches the Fourier eigenfunction factor") {
  const Grid g(1, 64);
  const Field c = sample(g, [](Vec x) { return std::cos(2 * pi * x[0]); });
  const Field out = heat_step(c, 0.1);
  const double factor = std::exp(-4 * pi * pi * 0.1);
  for (std::size_t n = 0; n < g.size(); ++n) CHECK(std::abs(out[n] - factor * c[n]) <= 1e-12);
  CHECK(sup_distance(heat_step(c, 0.0), c) == 0.0);
  const Field one(g, 1.0);
  CHECK(sup_distance(heat_step(one, 0.37), one) <= 1e-15);
}

TEST_CASE("heat_step in two dimensions uses |k|^2") {
  const Grid g(2, 16);
  const Field f = sample(g, [](Vec x) { return std::sin(2 * pi * x[0]) * std::cos(4 * pi * x[1]); });
  const Field out = heat_step(f, 0.01);
  const double factor = std::exp(-4 * pi * pi * 0.01 * 5.0);
  for (std::size_t n = 0; n < g.size(); ++n) CHECK(std::abs(out[n] - factor * f[n]) <= 1e-13);
}

TEST_CASE("heat_step preserves the mean of random fields") {
  std::mt19937_64 rng(7);
  for (int dim : {1, 2}) {
    const Grid g(dim, 16);
    for (int r = 0; r < 10; ++r) {
      const Field f = random_field(g, rng);
      CHECK(std::abs(heat_step(f, 0.05).mean() - f.mean()) <= 1e-14);
    }
  }
}

TEST_CASE("heat symbol with cross term is real and contracts") {
  const auto sym = spectral::heat_symbol(3, 8, 0.01, 0.5);
  for (double s : sym) {
    CHECK(s > 0.0);
    CHECK(s <= 1.0);
  }
  // Zero mode untouched.
  CHECK(sym[0] == 1.0);
}

TEST_CASE("laplacian of a Fourier mode") {
  const Grid g(1, 32);
  const Field f = sample(g, [](Vec x) { return std::sin(6 * pi * x[0]); });
  const Field l = laplacian(f);
  for (std::size_t n = 0; n < g.size(); ++n) CHECK(std::abs(l[n] + 36 * pi * pi * f[n]) <= 1e-10);
}

TEST_CASE("translate: index rotation for grid shifts, band-limited exactness otherwise") {
  const Grid g(1, 32);
  std::mt19937_64 rng(3);
  const Field f = random_field(g, rng);
  const Field r = translate(f, {3.0 / 32, 0.0});
  for (int i = 0; i < 32; ++i) CHECK(r[g.index(i)] == f[g.index(i - 3)]);
  const Field c = sample(g, [](Vec x) { return std::cos(2 * pi * x[0]) + 0.5 * std::sin(4 * pi * x[0]); });
  const double a = 0.0123;
  const Field t = translate(c, {a, 0.0});
  for (std::size_t n = 0; n < g.size(); ++n) {
    const double x = g.coord(n)[0] - a;
    CHECK(std::abs(t[n] - (std::cos(2 * pi * x) + 0.5 * std::sin(4 * pi * x))) <= 1e-12);
  }
}

TEST_CASE("Convolver agrees with the direct periodic sum") {
  std::mt19937_64 rng(11);
  for (int dim : {1, 2}) {
    const Grid g(dim, dim == 1 ? 24 : 10);
    const Field k = random_field(g, rng);
    const Field f = random_field(g, rng);
    const Convolver conv(k);
    const Field got = conv.apply(f);
    const int M = g.points();
    for (std::size_t x = 0; x < g.size(); ++x) {
      double s = 0.0;
      for (std::size_t y = 0; y < g.size(); ++y) {
        std::size_t d;
        if (dim == 1)
          d = g.index(int(x) - int(y));
        else
          d = g.index(int(x / M) - int(y / M), int(x % M) - int(y % M));
        s += k[d] * f[y];
      }
      CHECK(std::abs(got[x] - s * g.cell_volume()) <= 1e-13);
    }
  }
}

TEST_CASE("gradient: constants, smooth oracle and the sawtooth seam") {
  const Grid g(1, 64);
  CHECK(gradient(Field(g, 2.5)).sup_norm() == 0.0);
  const Field s = sample(g, [](Vec x) { return std::sin(2 * pi * x[0]); });
  const VectorField d = gradient(s);
  const double h = g.h();
  for (std::size_t n = 0; n < g.size(); ++n) {
    const double exact = 2 * pi * std::cos(2 * pi * g.coord(n)[0]);
    CHECK(std::abs(d.comp[0][n] - exact) <= pi * h * pi * h * 2 * pi + 1e-13);
  }
  // f_k = k is linear away from the wrap seam.
  Field saw(g);
  for (int k = 0; k < 64; ++k) saw[g.index(k)] = k;
  const VectorField ds = gradient(saw);
  for (int k = 1; k < 63; ++k) CHECK(std::abs(ds.comp[0][g.index(k)] - 1.0 / h) <= 1e-9);
  CHECK(std::abs(ds.comp[0][0] - (1.0 - 63.0) / (2 * h)) <= 1e-9);
  CHECK(std::abs(ds.comp[0][63] - (0.0 - 62.0) / (2 * h)) <= 1e-9);
}

TEST_CASE("divergence is minus the adjoint of gradient") {
  std::mt19937_64 rng(5);
  const Grid g(2, 12);
  const Field f = random_field(g, rng);
  VectorField v(g);
  for (auto& c : v.comp) c = random_field(g, rng);
  const VectorField df = gradient(f);
  double lhs = 0.0;
  for (int a = 0; a < 2; ++a) lhs += df.comp[a].dot(v.comp[a]);
  const double rhs = -f.dot(divergence(v));
  CHECK(std::abs(lhs - rhs) <= 1e-12);
}

TEST_CASE("upwind divergence: trivial cases and conservation") {
  std::mt19937_64 rng(9);
  for (int dim : {1, 2}) {
    const Grid g(dim, 16);
    const Measure m = random_measure(g, rng);
    CHECK(div_upwind_flux(m.density(), VectorField(g)).sup_norm() == 0.0);
    CHECK(div_upwind_flux(Measure::uniform(g).density(), VectorField(g, 0.7)).sup_norm() <= 1e-12);
    for (int r = 0; r < 20; ++r) {
      VectorField b(g);
      for (auto& c : b.comp) c = random_field(g, rng, -3, 3);
      const Field d = div_upwind_flux(random_measure(g, rng).density(), b);
      double s = 0.0;
      for (double v : d.values()) s += v;
      CHECK(std::abs(s) <= 1e-13 * double(g.size()) * 16);
    }
  }
}

TEST_CASE("upwind step with unit drift equals the semi-Lagrangian shift") {
  const Grid g(1, 64);
  const Measure bump = Measure::wrapped_gaussian(g, {0.5, 0.0}, 0.05);
  const double dt = 0.4 * g.h();
  Field next = bump.density();
  next.axpy(dt, div_upwind_flux(bump.density(), VectorField(g, 1.0)));
  // Velocity is -b = -1: the profile at x comes from x + dt.
  for (std::size_t n = 0; n < g.size(); ++n) {
    Vec x = g.coord(n);
    x[0] += dt;
    CHECK(std::abs(next[n] - interp(bump.density(), x)) <= 1e-12);
  }
  CHECK(std::abs(next.integral() - 1.0) <= 1e-14);
}

TEST_CASE("explicit FP step preserves positivity under the CFL bound") {
  std::mt19937_64 rng(13);
  for (int dim : {1, 2}) {
    const Grid g(dim, 16);
    for (int r = 0; r < 20; ++r) {
      Field m = random_field(g, rng, 0.0, 1.0);
      for (std::size_t n = 0; n < g.size(); n += 3) m[n] = 0.0;
      VectorField b(g);
      for (auto& c : b.comp) c = random_field(g, rng, -1, 1);
      const double dt = g.h() / max_axis_speed(b);
      Field next = m;
      next.axpy(dt, div_upwind_flux(m, b));
      for (double v : next.values()) CHECK(v >= -1e-15);
      heat_step_inplace(next, dt);
      for (double v : next.values()) CHECK(v >= -1e-14);
    }
  }
}

TEST_CASE("directional upwind derivative matches finite differences") {
  std::mt19937_64 rng(17);
  const Grid g(1, 32);
  const Field m = random_field(g, rng, 0.1, 1.0);
  VectorField b(g), db(g);
  b.comp[0] = random_field(g, rng, 0.5, 1.0);  // one-signed: no upwind switch nearby
  db.comp[0] = random_field(g, rng);
  VectorField bp = b;
  bp.comp[0].axpy(1e-6, db.comp[0]);
  Field fd = div_upwind_flux(m, bp) - div_upwind_flux(m, b);
  fd *= 1e6;
  CHECK(sup_distance(fd, div_upwind_flux_dir(m, b, db)) <= 1e-6);
}

TEST_CASE("wasserstein1 on the circle") {
  const Grid g(1, 10);
  const Measure a = Measure::dirac(g, 0), b = Measure::dirac(g, 7);
  CHECK(std::abs(wasserstein1(a, b) - 0.3) <= 1e-14);
  CHECK(wasserstein1(a, a) == 0.0);
  const Grid g64(1, 64);
  CHECK(std::abs(wasserstein1(Measure::uniform(g64), Measure::dirac(g64, 0)) - 0.25) <= 1e-14);
}

TEST_CASE("wasserstein1 is a metric on random triples") {
  std::mt19937_64 rng(21);
  for (int dim : {1, 2}) {
    const Grid g(dim, dim == 1 ? 32 : 8);
    for (int r = 0; r < 10; ++r) {
      const Measure a = random_measure(g, rng), b = random_measure(g, rng), c = random_measure(g, rng);
      const double ab = wasserstein1(a, b), ba = wasserstein1(b, a);
      CHECK(std::abs(ab - ba) <= 1e-12);
      CHECK(wasserstein1(a, c) <= ab + wasserstein1(b, c) + 1e-10);
      CHECK(wasserstein1(a, a) <= 1e-15);
    }
  }
}

TEST_CASE("2-d transport reduces to the circle formula for x-only measures") {
  std::mt19937_64 rng(23);
  const Grid g1(1, 12), g2(2, 12);
  for (int r = 0; r < 5; ++r) {
    const Measure a = random_measure(g1, rng), b = random_measure(g1, rng);
    Field A(g2), B(g2);
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < 12; ++j) {
        A[g2.index(i, j)] = a[std::size_t(i)];
        B[g2.index(i, j)] = b[std::size_t(i)];
      }
    CHECK(std::abs(wasserstein1(Measure(A), Measure(B)) - wasserstein1(a, b)) <= 1e-12);
  }
  // Two Diracs at diagonal offset: straight-line cost.
  CHECK(std::abs(wasserstein1(Measure::dirac(g2, g2.index(0, 0)), Measure::dirac(g2, g2.index(3, 3))) -
                 std::sqrt(2.0) * 0.25) <= 1e-14);
  CHECK_THROWS_AS(wasserstein1(Measure::uniform(Grid(2, 32)), Measure::uniform(Grid(2, 32))), CapabilityError);
}

TEST_CASE("interp and deposit") {
  const Grid g(1, 16);
  std::mt19937_64 rng(31);
  const Field f = random_field(g, rng);
  CHECK(interp(f, g.coord(5)) == f[5]);
  CHECK(std::abs(interp(f, {5.5 / 16, 0.0}) - 0.5 * (f[5] + f[6])) <= 1e-15);
  CHECK(std::abs(interp(f, {1.3, 0.0}) - interp(f, {0.3, 0.0})) <= 1e-14);
  CHECK(std::abs(interp(f, {-0.2, 0.0}) - interp(f, {0.8, 0.0})) <= 1e-14);

  const Measure single = deposit(g, std::vector<Vec>{g.coord(4)});
  CHECK(sup_distance(single.density(), Measure::dirac(g, 4).density()) <= 1e-12);
  const Measure many = deposit(g, std::vector<Vec>(7, g.coord(4)));
  CHECK(sup_distance(many.density(), single.density()) <= 1e-12);
  CHECK_THROWS_AS(deposit(g, std::vector<Vec>{}), InvalidArgument);
}

TEST_CASE("interp and deposit are adjoint") {
  std::mt19937_64 rng(37);
  for (int dim : {1, 2}) {
    const Grid g(dim, 12);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    std::vector<Vec> pts(9);
    std::vector<double> w(9);
    for (std::size_t p = 0; p < 9; ++p) {
      pts[p] = {U(rng), dim == 2 ? U(rng) : 0.0};
      w[p] = U(rng);
    }
    const Field f = random_field(g, rng);
    double lhs = 0.0;
    Field dep(g);
    for (std::size_t p = 0; p < 9; ++p) {
      lhs += interp(f, pts[p]) * w[p];
      splat(dep, pts[p], w[p]);
    }
    CHECK(std::abs(lhs - f.dot(dep)) <= 1e-13);
  }
}

TEST_CASE("deposit of uniform samples is close to uniform") {
  const Grid g(1, 64);
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<Vec> pts(10000);
  for (auto& p : pts) p = {U(rng), 0.0};
  CHECK(wasserstein1(deposit(g, pts), Measure::uniform(g)) <= 0.02);
}

TEST_CASE("push_forward by a grid-step shift moves mass one node") {
  const Grid g(1, 16);
  const Measure d = Measure::dirac(g, 3);
  const Measure s = shift_measure(d, {g.h(), 0.0});
  CHECK(sup_distance(s.density(), Measure::dirac(g, 4).density()) <= 1e-12);
}

TEST_CASE("snapshot round trip and CSV") {
  std::mt19937_64 rng(43);
  const Grid g(2, 8);
  const Field a = random_field(g, rng), b = random_field(g, rng);
  const std::string path = "snapshot_roundtrip.bin";
  write_snapshots(path, {a, b});
  const auto back = read_snapshots(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].raw() == a.raw());
  CHECK(back[1].raw() == b.raw());
  std::remove(path.c_str());
  CHECK_THROWS_AS(read_snapshots("does/not/exist.bin"), IoError);
}

TEST_CASE("measure invariants") {
  const Grid g(1, 8);
  CHECK_THROWS_AS(Measure(Field(g, -1.0)), InvalidArgument);
  CHECK_THROWS_AS(Measure(Field(g, 0.0)), InvalidArgument);
  Field f(g, 1.0);
  f[2] = -0.5;
  double clipped = 0.0;
  const Measure m = Measure::clip_and_normalize(f, &clipped);
  CHECK(std::abs(clipped - 0.5 / 8) <= 1e-15);
  CHECK(std::abs(m.density().integral() - 1.0) <= 1e-12);
  CHECK_THROWS_AS(Grid(3, 16), InvalidArgument);
  CHECK_THROWS_AS(Grid(1, 4), InvalidArgument);
}
