#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ifsm {

// Costs are rounded to integers of this many units per distance unit before
// the shortest-path search, so all potential and reduced-cost comparisons are
// exact. The reported cost uses the unrounded distances; the rounding can
// shift the optimum by at most 1/kTransportCostScale.
inline constexpr double kTransportCostScale = 1e9;

struct TransportPlan {
  double cost = 0.0;
  std::size_t sources = 0;
  std::size_t sinks = 0;
  std::vector<double> flow;  // sources x sinks, row-major
  std::size_t augmentations = 0;
};

// Balanced transportation problem solved by successive shortest paths with
// Dijkstra on reduced costs. `cost` is row-major sources x sinks with
// nonnegative entries; supply and demand totals must agree to 1e-9.
TransportPlan solve_transport(std::span<const double> supply, std::span<const double> demand,
                              std::span<const double> cost);

}  // namespace ifsm
