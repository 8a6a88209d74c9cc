#include "ifsm/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ifsm/error.hpp"

namespace ifsm {

namespace {
// Residual masses below this are treated as exhausted.
constexpr double kMassEps = 1e-15;
constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;
}  // namespace

TransportPlan solve_transport(std::span<const double> supply, std::span<const double> demand,
                              std::span<const double> cost) {
  const std::size_t n = supply.size();
  const std::size_t m = demand.size();
  if (n == 0 || m == 0) throw DomainError("transport: empty side");
  if (cost.size() != n * m) throw DimensionMismatch("transport: cost matrix has wrong shape");

  double total_supply = 0.0, total_demand = 0.0;
  for (double s : supply) {
    if (!(s >= 0.0)) throw DomainError("transport: negative supply");
    total_supply += s;
  }
  for (double d : demand) {
    if (!(d >= 0.0)) throw DomainError("transport: negative demand");
    total_demand += d;
  }
  if (std::abs(total_supply - total_demand) > 1e-9) throw DomainError("transport: unbalanced masses");

  std::vector<std::int64_t> icost(n * m);
  for (std::size_t k = 0; k < n * m; ++k) {
    if (!(cost[k] >= 0.0) || !std::isfinite(cost[k])) throw DomainError("transport: invalid cost entry");
    const double scaled = cost[k] * kTransportCostScale;
    if (scaled > 1e17) throw CapacityExceeded("transport: cost too large for integer scaling");
    icost[k] = std::llround(scaled);
  }

  TransportPlan plan;
  plan.sources = n;
  plan.sinks = m;
  plan.flow.assign(n * m, 0.0);
  std::vector<double> left(supply.begin(), supply.end());
  std::vector<double> need(demand.begin(), demand.end());

  // Node ids: sources 0..n-1, sinks n..n+m-1.
  const std::size_t nodes = n + m;
  std::vector<std::int64_t> potential(nodes, 0);
  std::vector<std::int64_t> dist(nodes);
  std::vector<std::size_t> pred(nodes);
  std::vector<char> done(nodes);
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  while (true) {
    bool any_supply = false, any_demand = false;
    for (double s : left) any_supply |= s > kMassEps;
    for (double d : need) any_demand |= d > kMassEps;
    if (!any_supply || !any_demand) break;

    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(pred.begin(), pred.end(), kNone);
    std::fill(done.begin(), done.end(), 0);
    for (std::size_t i = 0; i < n; ++i)
      if (left[i] > kMassEps) dist[i] = 0;

    std::size_t target = kNone;
    while (true) {
      std::size_t u = kNone;
      for (std::size_t v = 0; v < nodes; ++v)
        if (!done[v] && dist[v] < kInf && (u == kNone || dist[v] < dist[u])) u = v;
      if (u == kNone) break;
      done[u] = 1;
      if (u >= n && need[u - n] > kMassEps) {
        target = u;
        break;
      }
      if (u < n) {
        const std::int64_t* row = icost.data() + u * m;
        for (std::size_t j = 0; j < m; ++j) {
          const std::size_t v = n + j;
          if (done[v]) continue;
          const std::int64_t nd = dist[u] + row[j] + potential[u] - potential[v];
          if (nd < dist[v]) {
            dist[v] = nd;
            pred[v] = u;
          }
        }
      } else {
        const std::size_t j = u - n;
        for (std::size_t i = 0; i < n; ++i) {
          if (done[i] || plan.flow[i * m + j] <= kMassEps) continue;
          const std::int64_t nd = dist[u] - icost[i * m + j] + potential[u] - potential[i];
          if (nd < dist[i]) {
            dist[i] = nd;
            pred[i] = u;
          }
        }
      }
    }
    if (target == kNone) throw Error("transport: no augmenting path (internal error)");

    const std::int64_t reach = dist[target];
    for (std::size_t v = 0; v < nodes; ++v) potential[v] += std::min(dist[v], reach);

    double delta = need[target - n];
    std::size_t v = target;
    while (pred[v] != kNone) {
      const std::size_t u = pred[v];
      if (u >= n) delta = std::min(delta, plan.flow[v * m + (u - n)]);  // backward arc sink u -> source v
      v = u;
    }
    delta = std::min(delta, left[v]);

    left[v] -= delta;
    need[target - n] -= delta;
    v = target;
    while (pred[v] != kNone) {
      const std::size_t u = pred[v];
      if (u < n) {
        plan.flow[u * m + (v - n)] += delta;
      } else {
        double& f = plan.flow[v * m + (u - n)];
        f -= delta;
        if (f <= kMassEps) f = 0.0;
      }
      v = u;
    }
    if (left[v] <= kMassEps) left[v] = 0.0;
    if (need[target - n] <= kMassEps) need[target - n] = 0.0;
    ++plan.augmentations;
  }

  double total = 0.0;
  for (std::size_t k = 0; k < n * m; ++k)
    if (plan.flow[k] > 0.0) total += plan.flow[k] * cost[k];
  plan.cost = total;
  return plan;
}

}  // namespace ifsm
