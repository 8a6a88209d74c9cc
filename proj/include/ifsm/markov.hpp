#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "ifsm/measure.hpp"
#include "ifsm/metric.hpp"
#include "ifsm/model.hpp"

namespace ifsm {

// A function known at the points of a grid, evaluated elsewhere by the value
// at the nearest grid point (lowest index on ties). Lattice grids built by
// PointCloud::grid use constant-time lookup under the euclidean metric.
class SampledFunction {
 public:
  SampledFunction(PointCloud grid, std::vector<double> values, Metric metric = Metric::euclidean,
                  std::optional<double> lipschitz = std::nullopt);
  static SampledFunction sample(PointCloud grid, const std::function<double(Coords)>& f,
                                Metric metric = Metric::euclidean, std::optional<double> lipschitz = std::nullopt);
  static SampledFunction constant(const Box& box, double c);

  const PointCloud& grid() const { return *grid_; }
  const std::vector<double>& values() const { return values_; }
  const std::optional<double>& lipschitz() const { return lipschitz_; }

  std::size_t nearest(Coords x) const;
  double operator()(Coords x) const { return values_[nearest(x)]; }

 private:
  std::shared_ptr<const PointCloud> grid_;
  std::vector<double> values_;
  Metric metric_;
  std::optional<double> lipschitz_;
  std::shared_ptr<const NearestIndex> index_;  // irregular grids only
  std::vector<std::size_t> counts_;           // lattice grids only
  std::vector<double> lo_, step_;
};

// B_q(f)(x) = sum_j q_x(j) f(tau_j(x)).
double transfer_apply(const IfsmModel& model, const SampledFunction& f, Coords x);
// Expectation of f(tau_{lambda^M}(x)) under the composed measure at x.
double transfer_apply_M(const IfsmModel& model, const SampledFunction& f, Coords x, std::size_t depth,
                        const ComposeOptions& opts = {});

// T_q(mu) = sum_i sum_j mu_i q_{x_i}(j) delta_{tau_j(x_i)}, binned to the
// model's domain grid at `resolution` cells per axis (0: merge identical
// atoms only).
DiscreteMeasure markov_push(const IfsmModel& model, const DiscreteMeasure& mu, std::size_t resolution);
// `depth` successive pushes, binned after each one.
DiscreteMeasure markov_push_M(const IfsmModel& model, const DiscreteMeasure& mu, std::size_t depth,
                              std::size_t resolution);

struct InvariantOptions {
  std::size_t resolution = 729;
  double tol = 1e-4;
  std::size_t max_iter = 500;
  // Lipschitz constant of T_q when known; enables the residual bound.
  std::optional<double> contraction;
};

struct InvariantLog {
  std::vector<double> deltas;  // W1 between successive iterates
  std::vector<double> ratios;
  double observed_ratio = 0.0;  // median of the last five ratios
  bool converged = false;
  std::size_t iterations = 0;
  double cell_diameter = 0.0;
  // cell_diameter / (2 (1 - c)) when a contraction c < 1 is known.
  std::optional<double> residual_bound;
};

struct InvariantResult {
  DiscreteMeasure measure;
  InvariantLog log;
};

// Iterates markov_push from mu0 (default: uniform over the grid cells) until
// the W1 delta drops below tol.
InvariantResult invariant_measure(const IfsmModel& model, const std::optional<DiscreteMeasure>& mu0,
                                  const InvariantOptions& opts = {});

}  // namespace ifsm
