#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ifsm/markov.hpp"
#include "ifsm/measure.hpp"
#include "ifsm/model.hpp"
#include "ifsm/rng.hpp"

namespace ifsm {

struct Trajectory {
  std::uint64_t seed = 0;
  std::size_t dim = 0;
  std::vector<double> points;          // (steps + 1) x dim, row-major
  std::vector<std::uint32_t> chosen;   // steps entries

  std::size_t size() const { return dim == 0 ? 0 : points.size() / dim; }
  Coords point(std::size_t k) const { return {points.data() + k * dim, dim}; }
};

// Index j with cumulative weight c_j the first satisfying u < c_j. Draws that
// fall past the rounded total go to the last positive atom.
std::size_t choose_index(std::span<const double> weights, double u);

// Z_{k+1} = tau_{lambda_k}(Z_k) with lambda_k drawn from q_{Z_k}.
Trajectory sample_trajectory(const IfsmModel& model, Coords z0, std::size_t steps, std::uint64_t seed);
// Same, drawing from an existing generator (for per-trajectory streams).
Trajectory sample_trajectory(const IfsmModel& model, Coords z0, std::size_t steps, Rng& rng);

inline constexpr std::size_t kDefaultBurnIn = 1000;

// Uniform mass on points[burn_in..], binned to `box` at `resolution` cells per
// axis (0: merge identical points only).
DiscreteMeasure empirical_measure(const Trajectory& t, std::size_t burn_in, const Box& box, std::size_t resolution);

struct ExpectationReport {
  std::size_t k = 0;
  std::size_t samples = 0;
  double mc_mean = 0.0;
  double std_error = 0.0;
  double exact = 0.0;  // B_q^k(f)(x) via the composed measure
  double z_score = 0.0;
  bool within(double n_sigma) const;
};

// Monte-Carlo E[f(Z_k) | Z_0 = x] over n independent trajectories; trajectory
// i draws from stream_seed(seed, i).
ExpectationReport conditional_expectation_check(const IfsmModel& model, const SampledFunction& f, Coords x,
                                                std::size_t k, std::size_t n_samples, std::uint64_t seed);

// Positions of n independent trajectories from x after 0, 1, ..., steps
// steps; trajectory i draws from stream_seed(seed, i).
std::vector<PointCloud> ensemble_positions(const IfsmModel& model, Coords x, std::size_t steps, std::size_t n_samples,
                                           std::uint64_t seed);

}  // namespace ifsm
