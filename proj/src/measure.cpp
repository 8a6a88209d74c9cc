#include "ifsm/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "ifsm/error.hpp"
#include "ifsm/transport.hpp"

namespace ifsm {

DiscreteMeasure::DiscreteMeasure(PointCloud atoms, std::vector<double> weights)
    : atoms_(std::move(atoms)), weights_(std::move(weights)) {
  if (atoms_.size() != weights_.size())
    throw DimensionMismatch("measure: " + std::to_string(atoms_.size()) + " atoms but " +
                            std::to_string(weights_.size()) + " weights");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("measure: weights must be finite and nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > kMassTolerance)
    throw DomainError("measure: weights sum to " + std::to_string(total) + ", not 1");
}

DiscreteMeasure DiscreteMeasure::dirac(const Point& p) { return {PointCloud({p}), {1.0}}; }

DiscreteMeasure DiscreteMeasure::uniform(PointCloud atoms) {
  std::vector<double> w(atoms.size(), 1.0);
  return normalize(atoms, std::move(w));
}

double DiscreteMeasure::max_weight() const { return *std::max_element(weights_.begin(), weights_.end()); }

std::vector<double> normalize_weights(std::vector<double> weights) {
  if (weights.empty()) throw DomainError("normalize: no weights");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("normalize: weights must be finite and nonnegative");
    total += w;
  }
  if (!(total > 0.0)) throw DomainError("normalize: total mass must be positive");
  double running = 0.0;
  std::size_t last = weights.size() - 1;
  while (last > 0 && weights[last] == 0.0) --last;  // keep zero atoms at zero
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (i == last) continue;
    weights[i] /= total;
    running += weights[i];
  }
  weights[last] = std::max(0.0, 1.0 - running);
  return weights;
}

DiscreteMeasure normalize(const PointCloud& atoms, std::vector<double> weights) {
  return {atoms, normalize_weights(std::move(weights))};
}

// ---------------------------------------------------------------------------
// Wasserstein-1

double wasserstein1_cdf(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.dim() != 1 || nu.dim() != 1) throw DimensionMismatch("wasserstein1_cdf: one-dimensional measures only");
  struct Event {
    double x;
    double dmass;  // +w for mu, -w for nu
  };
  std::vector<Event> events;
  events.reserve(mu.size() + nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) events.push_back({mu.atom(i)[0], mu.weight(i)});
  for (std::size_t i = 0; i < nu.size(); ++i) events.push_back({nu.atom(i)[0], -nu.weight(i)});
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.x < b.x; });
  double gap = 0.0, total = 0.0;
  for (std::size_t k = 0; k + 1 < events.size(); ++k) {
    gap += events[k].dmass;
    total += std::abs(gap) * (events[k + 1].x - events[k].x);
  }
  return total;
}

double wasserstein1_flow(const DiscreteMeasure& mu, const DiscreteMeasure& nu, Metric m,
                         const WassersteinOptions& opts) {
  if (mu.dim() != nu.dim()) throw DimensionMismatch("wasserstein1: dimension mismatch");
  // Zero-weight atoms carry no flow; drop them to keep the graph small.
  std::vector<std::size_t> src, dst;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu.weight(i) > 0.0) src.push_back(i);
  for (std::size_t j = 0; j < nu.size(); ++j)
    if (nu.weight(j) > 0.0) dst.push_back(j);
  const double pairs = static_cast<double>(src.size()) * static_cast<double>(dst.size());
  if (pairs > opts.max_pairs)
    throw CapacityExceeded("wasserstein1: support sizes " + std::to_string(src.size()) + " x " +
                           std::to_string(dst.size()) + " exceed the cap of " + std::to_string(opts.max_pairs) +
                           " pairs; subsample or bin the measures to a coarser grid first");
  std::vector<double> supply, demand, cost(src.size() * dst.size());
  for (auto i : src) supply.push_back(mu.weight(i));
  for (auto j : dst) demand.push_back(nu.weight(j));
  for (std::size_t a = 0; a < src.size(); ++a)
    for (std::size_t b = 0; b < dst.size(); ++b) cost[a * dst.size() + b] = distance(mu.atom(src[a]), nu.atom(dst[b]), m);
  return solve_transport(supply, demand, cost).cost;
}

double wasserstein1(const DiscreteMeasure& mu, const DiscreteMeasure& nu, Metric m, const WassersteinOptions& opts) {
  if (mu.dim() != nu.dim()) throw DimensionMismatch("wasserstein1: dimension mismatch");
  if (mu.dim() == 1) return wasserstein1_cdf(mu, nu);
  return wasserstein1_flow(mu, nu, m, opts);
}

double wasserstein1_on(const PointCloud& atoms, const std::vector<double>& p, const std::vector<double>& q, Metric m,
                       const WassersteinOptions& opts) {
  return wasserstein1(DiscreteMeasure(atoms, p), DiscreteMeasure(atoms, q), m, opts);
}

// ---------------------------------------------------------------------------

PointCloud support(const DiscreteMeasure& mu, double weight_floor) {
  if (weight_floor < 0.0) throw DomainError("support: weight floor must be >= 0");
  if (weight_floor >= mu.max_weight()) throw DomainError("support: weight floor leaves no atoms");
  std::vector<double> flat;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu.weight(i) > weight_floor) {
      const auto a = mu.atom(i);
      flat.insert(flat.end(), a.begin(), a.end());
    }
  }
  return {mu.dim(), std::move(flat)};
}

DiscreteMeasure bin_to_grid(const DiscreteMeasure& mu, const CellGrid& grid) {
  if (mu.dim() != grid.dim()) throw DimensionMismatch("bin_to_grid: dimension mismatch");
  std::vector<std::pair<std::uint64_t, std::size_t>> keyed(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) keyed[i] = {grid.key(mu.atom(i)), i};
  std::sort(keyed.begin(), keyed.end());
  std::vector<double> flat, weights;
  std::vector<double> center(grid.dim());
  for (std::size_t k = 0; k < keyed.size();) {
    const auto key = keyed[k].first;
    double w = 0.0;
    for (; k < keyed.size() && keyed[k].first == key; ++k) w += mu.weight(keyed[k].second);
    grid.center_of_key(key, center);
    flat.insert(flat.end(), center.begin(), center.end());
    weights.push_back(w);
  }
  // regrouped sums drift for large supports
  return normalize(PointCloud(grid.dim(), std::move(flat)), std::move(weights));
}

DiscreteMeasure uniform_grid_measure(const CellGrid& grid) {
  std::uint64_t cells = 1;
  for (std::size_t a = 0; a < grid.dim(); ++a) cells *= grid.resolution();
  if (cells > 50'000'000ULL) throw CapacityExceeded("uniform_grid_measure: grid has too many cells");
  std::vector<double> flat(cells * grid.dim());
  for (std::uint64_t k = 0; k < cells; ++k) grid.center_of_key(k, {flat.data() + k * grid.dim(), grid.dim()});
  return DiscreteMeasure::uniform(PointCloud(grid.dim(), std::move(flat)));
}

DiscreteMeasure merge_duplicates(const DiscreteMeasure& mu) {
  const std::size_t d = mu.dim();
  std::vector<std::size_t> order(mu.size());
  std::iota(order.begin(), order.end(), 0);
  auto less = [&](std::size_t a, std::size_t b) {
    const auto pa = mu.atom(a), pb = mu.atom(b);
    return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(), pb.end());
  };
  std::stable_sort(order.begin(), order.end(), less);
  std::vector<double> flat, weights;
  for (std::size_t k = 0; k < order.size();) {
    const auto p = mu.atom(order[k]);
    double w = 0.0;
    std::size_t k2 = k;
    while (k2 < order.size() && std::equal(p.begin(), p.end(), mu.atom(order[k2]).begin())) w += mu.weight(order[k2++]);
    flat.insert(flat.end(), p.begin(), p.end());
    weights.push_back(w);
    k = k2;
  }
  return normalize(PointCloud(d, std::move(flat)), std::move(weights));
}

double cdf(const DiscreteMeasure& mu, double x) {
  if (mu.dim() != 1) throw DimensionMismatch("cdf: one-dimensional measures only");
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu.atom(i)[0] <= x) s += mu.weight(i);
  return s;
}

}  // namespace ifsm
