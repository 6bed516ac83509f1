#include "torus/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "common/error.hpp"

namespace mfg {

namespace {

double circle_w1(const Field& a, const Field& b) {
  const std::size_t M = a.size();
  const double h = a.grid().h();
  std::vector<double> cdf(M);
  double run = 0.0;
  for (std::size_t k = 0; k < M; ++k) {
    run += (a[k] - b[k]) * h;
    cdf[k] = run;
  }
  std::vector<double> sorted = cdf;
  std::nth_element(sorted.begin(), sorted.begin() + M / 2, sorted.end());
  const double c = sorted[M / 2];
  double s = 0.0;
  for (double v : cdf) s += std::abs(v - c);
  return s * h;
}

// Successive shortest paths on the bipartite transport graph (sources carry
// surplus mass, sinks carry deficit). Arcs source->sink have unbounded capacity;
// the residual reverse arc exists while flow is positive. Dense Dijkstra with
// potentials keeps reduced costs nonnegative.
double torus_transport(const Field& a, const Field& b) {
  const Grid& g = a.grid();
  const double vol = g.cell_volume();
  std::vector<std::size_t> src, dst;
  std::vector<double> supply, demand;
  for (std::size_t n = 0; n < g.size(); ++n) {
    const double d = (a[n] - b[n]) * vol;
    if (d > 0.0) {
      src.push_back(n);
      supply.push_back(d);
    } else if (d < 0.0) {
      dst.push_back(n);
      demand.push_back(-d);
    }
  }
  const std::size_t S = src.size(), D = dst.size();
  if (S == 0 || D == 0) return 0.0;
  std::vector<double> cost(S * D);
  for (std::size_t i = 0; i < S; ++i)
    for (std::size_t j = 0; j < D; ++j)
      cost[i * D + j] = torus_distance(g.coord(src[i]), g.coord(dst[j]), g.dim());

  std::vector<double> flow(S * D, 0.0);
  std::vector<double> pot(S + D, 0.0);  // sources first, then sinks
  const double inf = std::numeric_limits<double>::infinity();
  double total_supply = 0.0;
  for (double v : supply) total_supply += v;
  const double eps = 1e-13 * total_supply;
  std::vector<double> dist(S + D);
  std::vector<long> prev(S + D);
  std::vector<char> done(S + D);

  double remaining = 0.0;
  for (double s : supply) remaining += s;
  for (int guard = 0; remaining > eps; ++guard) {
    if (guard > int(4 * (S + D) + 100)) throw Error(ErrorCode::Numerical, "transport solver failed to terminate");
    std::fill(dist.begin(), dist.end(), inf);
    std::fill(prev.begin(), prev.end(), -1);
    std::fill(done.begin(), done.end(), 0);
    for (std::size_t i = 0; i < S; ++i)
      if (supply[i] > eps) dist[i] = 0.0;
    long target = -1;
    for (;;) {
      long u = -1;
      double best = inf;
      for (std::size_t v = 0; v < S + D; ++v)
        if (!done[v] && dist[v] < best) {
          best = dist[v];
          u = long(v);
        }
      if (u < 0) break;
      done[u] = 1;
      if (std::size_t(u) >= S && demand[u - S] > eps) {
        target = u;
        break;
      }
      if (std::size_t(u) < S) {
        const std::size_t i = std::size_t(u);
        for (std::size_t j = 0; j < D; ++j) {
          const std::size_t v = S + j;
          if (done[v]) continue;
          const double nd = dist[u] + cost[i * D + j] + pot[i] - pot[v];
          if (nd < dist[v]) {
            dist[v] = nd;
            prev[v] = u;
          }
        }
      } else {
        const std::size_t j = std::size_t(u) - S;
        for (std::size_t i = 0; i < S; ++i) {
          if (done[i] || flow[i * D + j] <= eps) continue;
          const double nd = dist[u] - cost[i * D + j] + pot[u] - pot[i];
          if (nd < dist[i]) {
            dist[i] = nd;
            prev[i] = u;
          }
        }
      }
    }
    if (target < 0) {
      // Only rounding-level imbalance left between supply and demand.
      if (remaining <= 1e-10 * total_supply) break;
      throw Error(ErrorCode::Numerical, "transport solver found no augmenting path");
    }
    const double dt = dist[target];
    for (std::size_t v = 0; v < S + D; ++v) pot[v] += std::min(dist[v], dt);

    double push = demand[target - S];
    long v = target;
    while (prev[v] >= 0) {
      const long u = prev[v];
      if (std::size_t(u) >= S) push = std::min(push, flow[std::size_t(v) * D + (u - S)]);
      v = u;
    }
    push = std::min(push, supply[v]);
    supply[v] -= push;
    demand[target - S] -= push;
    remaining -= push;
    v = target;
    while (prev[v] >= 0) {
      const long u = prev[v];
      if (std::size_t(u) < S)
        flow[std::size_t(u) * D + (v - S)] += push;
      else
        flow[std::size_t(v) * D + (u - S)] -= push;
      v = u;
    }
  }
  double total = 0.0;
  for (std::size_t k = 0; k < S * D; ++k) total += flow[k] * cost[k];
  return total;
}

}  // namespace

double wasserstein1(const Field& a, const Field& b) {
  if (!(a.grid() == b.grid())) throw InvalidArgument("wasserstein1 needs measures on the same grid");
  if (a.grid().dim() == 1) return circle_w1(a, b);
  if (a.grid().points() > 24) throw CapabilityError("2-d Wasserstein distance is limited to M <= 24");
  return torus_transport(a, b);
}

}  // namespace mfg
