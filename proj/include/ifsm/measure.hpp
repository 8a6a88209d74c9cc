#pragma once

#include <cstddef>
#include <vector>

#include "ifsm/metric.hpp"

namespace ifsm {

// Tolerance on the total mass of a probability vector.
inline constexpr double kMassTolerance = 1e-12;

// Probability measure with finitely many weighted atoms.
class DiscreteMeasure {
 public:
  // Weights must be nonnegative and sum to 1 within kMassTolerance.
  DiscreteMeasure(PointCloud atoms, std::vector<double> weights);

  static DiscreteMeasure dirac(const Point& p);
  static DiscreteMeasure uniform(PointCloud atoms);

  std::size_t dim() const { return atoms_.dim(); }
  std::size_t size() const { return weights_.size(); }
  const PointCloud& atoms() const { return atoms_; }
  Coords atom(std::size_t i) const { return atoms_[i]; }
  const std::vector<double>& weights() const { return weights_; }
  double weight(std::size_t i) const { return weights_[i]; }
  double max_weight() const;

  // Integral of f against the measure.
  template <typename F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i) s += weights_[i] * f(atoms_[i]);
    return s;
  }

 private:
  PointCloud atoms_;
  std::vector<double> weights_;
};

// Rescales nonnegative weights to sum to 1; the last weight absorbs the
// rounding residue. Throws DomainError on zero or negative total mass.
std::vector<double> normalize_weights(std::vector<double> weights);
DiscreteMeasure normalize(const PointCloud& atoms, std::vector<double> weights);

struct WassersteinOptions {
  // Largest |supp mu| * |supp nu| handed to the flow solver.
  double max_pairs = 4e6;
};

// Closed form for D = 1: integral of |F - G| over the line.
double wasserstein1_cdf(const DiscreteMeasure& mu, const DiscreteMeasure& nu);
// Exact min-cost flow on the bipartite atom graph, any dimension.
double wasserstein1_flow(const DiscreteMeasure& mu, const DiscreteMeasure& nu, Metric m,
                         const WassersteinOptions& opts = {});
// Dispatches to the CDF formula for D = 1 and to the flow solver otherwise.
double wasserstein1(const DiscreteMeasure& mu, const DiscreteMeasure& nu, Metric m,
                    const WassersteinOptions& opts = {});

// W1 between two probability vectors on a shared set of atoms.
double wasserstein1_on(const PointCloud& atoms, const std::vector<double>& p, const std::vector<double>& q,
                       Metric m, const WassersteinOptions& opts = {});

// Atoms carrying weight strictly above the floor.
PointCloud support(const DiscreteMeasure& mu, double weight_floor = 0.0);

// Moves each atom's mass to the center of its grid cell. Output atoms are in
// lexicographic cell order.
DiscreteMeasure bin_to_grid(const DiscreteMeasure& mu, const CellGrid& grid);

// Uniform mass over all cell centers of the grid.
DiscreteMeasure uniform_grid_measure(const CellGrid& grid);

// Merges atoms with bitwise-identical coordinates (sorted lexicographically).
DiscreteMeasure merge_duplicates(const DiscreteMeasure& mu);

// mu((-inf, x]) for one-dimensional measures.
double cdf(const DiscreteMeasure& mu, double x);

}  // namespace ifsm
