#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ifsm/expression.hpp"
#include "ifsm/measure.hpp"
#include "ifsm/metric.hpp"

namespace ifsm {

// Finite parameter space. A continuous interval is represented by a uniform
// atom grid; the interval description is kept for serialization.
class ParamSpace {
 public:
  struct Interval {
    Box box;
    std::size_t grid = 0;  // atoms per axis
  };

  ParamSpace(PointCloud atoms, Metric metric);
  static ParamSpace from_interval(Box box, std::size_t grid, Metric metric);

  std::size_t size() const { return atoms_.size(); }
  std::size_t dim() const { return atoms_.dim(); }
  const PointCloud& atoms() const { return atoms_; }
  Coords atom(std::size_t j) const { return atoms_[j]; }
  Metric metric() const { return metric_; }
  double diameter() const { return diameter_; }
  double distance(std::size_t a, std::size_t b) const;
  const std::optional<Interval>& interval() const { return interval_; }

 private:
  PointCloud atoms_;
  Metric metric_;
  double diameter_ = 0.0;
  std::optional<Interval> interval_;
};

// tau_j(x) = A_j x + b_j; A_j row-major D x D.
struct AffineMaps {
  std::vector<std::vector<double>> matrices;
  std::vector<std::vector<double>> offsets;
};

// Skew system induced by a degree-m GIFS on X in R:
//   tau_j(z_1, ..., z_m) = (z_2, ..., z_m, phi_j(z)),
//   phi_j(z) = sum_i a_{j,i} z_i + c_j.
struct GifsSkewMaps {
  std::size_t degree = 2;
  std::vector<std::vector<double>> coefficients;  // per atom, length m
  std::vector<double> offsets;                    // per atom
};

// tau(lambda, x)_i = expressions[i](x, lambda).
struct CustomMaps {
  std::vector<Expression> expressions;
};

using MapFamily = std::variant<AffineMaps, GifsSkewMaps, CustomMaps>;

// q_x = p for every x.
struct ConstantWeights {
  std::vector<double> p;
};

// q_x(lambda_j) proportional to exp(A(tau_j(x))) * base_j.
struct ThermodynamicWeights {
  Expression potential;
  std::vector<double> base;
  std::optional<double> potential_lipschitz;  // declared Lip(A)
  std::optional<double> potential_sup;        // declared sup |A|
};

// q_x = (1 - h(x)) nu1 + h(x) nu2.
struct MixtureWeights {
  Expression h;
  std::vector<double> nu1;
  std::vector<double> nu2;
  std::optional<double> h_lipschitz;  // declared Lip(h)
};

// q_x(lambda_j) proportional to w(x, lambda_j) >= 0.
struct CustomWeights {
  Expression w;
};

using WeightFamily = std::variant<ConstantWeights, ThermodynamicWeights, MixtureWeights, CustomWeights>;

// Escape tolerance for the self-map property.
inline constexpr double kEscapeTolerance = 1e-9;

// Tuples of zero probability are omitted; with no pruning the count is
// |Lambda|^M minus those.
struct ComposedMeasure {
  std::size_t depth = 0;
  Point base;
  std::vector<std::uint32_t> indices;  // count x depth, row-major
  std::vector<double> weights;
  double discarded_mass = 0.0;
  bool renormalized = false;

  std::size_t size() const { return weights.size(); }
  std::span<const std::uint32_t> tuple(std::size_t k) const { return {indices.data() + k * depth, depth}; }
};

struct ComposeOptions {
  double prune_floor = 0.0;
  std::size_t max_tuples = 2'000'000;
};

// The IFS with place-dependent measures R = (X, tau, q). Immutable once built;
// all evaluation methods are const and thread-safe.
class IfsmModel {
 public:
  IfsmModel(std::string name, Box domain, Metric metric, ParamSpace params, MapFamily maps, WeightFamily weights,
            bool full_support = true, std::size_t depth = 1);

  const std::string& name() const { return name_; }
  const Box& domain() const { return domain_; }
  Metric metric() const { return metric_; }
  std::size_t dim() const { return domain_.dim(); }
  const ParamSpace& params() const { return params_; }
  std::size_t num_maps() const { return params_.size(); }
  const MapFamily& maps() const { return maps_; }
  const WeightFamily& weights() const { return weights_; }
  bool declares_full_support() const { return full_support_; }
  // Composition depth M used for the eventually-contractive conditions.
  std::size_t depth() const { return depth_; }

  // tau_j(x) into out (dim() entries). Throws ModelError if the image leaves
  // the domain by more than kEscapeTolerance; tolerated overshoot is clamped.
  void apply(std::size_t j, Coords x, std::span<double> out) const;
  Point eval_map(std::size_t j, Coords x) const;
  // Applies tuple[0] first.
  Point compose_map(std::span<const std::uint32_t> tuple, Coords x) const;

  // q_x as a probability vector over the parameter atoms.
  void weights_into(Coords x, std::span<double> out) const;
  std::vector<double> weight_vector(Coords x) const;
  DiscreteMeasure weights_at(Coords x) const;
  // Thermodynamic family only: the normalizing constant sum_j exp(A(tau_j x)) base_j.
  double partition_function(Coords x) const;

  ComposedMeasure composed_measure(std::size_t depth, Coords x, const ComposeOptions& opts = {}) const;

  // Affine form when every map is affine (affine and gifs_skew kinds).
  std::optional<AffineMaps> as_affine() const;

  // Self-map and weight sanity checks at corners and seeded interior samples.
  // Run by the constructor; throws ModelError.
  void validate(std::size_t samples = 256, std::uint64_t seed = 0x1f5) const;

 private:
  void apply_raw(std::size_t j, Coords x, std::span<double> out) const;

  std::string name_;
  Box domain_;
  Metric metric_;
  ParamSpace params_;
  MapFamily maps_;
  WeightFamily weights_;
  bool full_support_;
  std::size_t depth_;
};

}  // namespace ifsm
