#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ifsm/measure.hpp"
#include "ifsm/metric.hpp"
#include "ifsm/model.hpp"

namespace ifsm {

enum class Provenance {
  analytic,  // computed from coefficients or declared by the model
  sampled,   // largest observed ratio: a lower bound on the true constant
};
enum class Verdict { pass, fail, estimate_only, not_applicable };

std::string_view to_string(Provenance p);
std::string_view to_string(Verdict v);

struct Constant {
  double value = 0.0;
  Provenance provenance = Provenance::sampled;
  // Sampled estimate, kept alongside analytic values as a cross-check.
  double sampled = 0.0;
};

struct Condition {
  std::string name;
  Verdict verdict = Verdict::not_applicable;
  std::string note;
};

struct HypothesisReport {
  std::string model;
  std::size_t M = 1;
  Constant lip_one_step;  // sup_j Lip(tau_j)
  Constant lip_M;         // sup over M-tuples of Lip(tau_{lambda^M})
  Constant r;             // Lip of lambda -> tau(lambda, x), uniform in x
  Constant t;             // Lip of x -> q_x in the W1 metric on P(Lambda)
  double s = 0.0;         // contraction constant entering the budgets
  std::string s_source;   // "C1" or "CP1"
  double budget1 = 0.0;   // s + r t
  double budget2 = 0.0;   // s + r M t
  double m1_estimate = 0.0;
  std::optional<double> mp1_estimate;
  double h4_min_weight = 0.0;
  // Thermodynamic family: range of the unnormalized partition function.
  std::optional<double> partition_min, partition_max;
  double slack = 1e-9;
  std::vector<Condition> conditions;

  Verdict verdict(std::string_view name) const;
};

struct CheckOptions {
  std::size_t samples = 2000;        // random pairs per sampled estimate
  std::size_t grid_points = 33;      // lattice points per axis
  std::size_t max_tuples = 100'000;  // enumeration cap for M-tuples
  std::uint64_t seed = 0xc0ffee;
};

HypothesisReport check_hypotheses(const IfsmModel& model, const CheckOptions& opts = {});

// Operator norm of a row-major D x D matrix for the given metric (spectral
// norm for euclidean, max absolute row sum for max_coord).
double operator_norm(std::span<const double> a, std::size_t d, Metric m);

// Smallest weight q_x(j) over the lattice plus `samples` random points.
double min_atom_weight(const IfsmModel& model, std::size_t grid_points = 33, std::size_t samples = 256,
                       std::uint64_t seed = 0xc0ffee);

struct SupportReport {
  double distance = 0.0;
  double tol = 0.0;
  bool holds = false;
  std::size_t support_size = 0;
  std::size_t attractor_size = 0;
  Verdict h4 = Verdict::not_applicable;
  double h4_min_weight = 0.0;
};

SupportReport support_equals_attractor(const IfsmModel& model, const DiscreteMeasure& invariant,
                                       const PointCloud& attractor, double weight_floor, double tol);

struct StabilityOptions {
  std::size_t resolution = 729;
  double tol = 1e-6;
  std::size_t random_points = 100;
  std::size_t max_grid_points = 4096;
  std::uint64_t seed = 0x57ab1e;
  CheckOptions check;
};

struct StabilityRow {
  std::size_t index = 0;
  double eps = 0.0;       // sup_x W1(q^n_x, q*_x)
  double distance = 0.0;  // W1(mu^n, mu*)
  double bound = 0.0;     // r / (1 - (r t + s)) * eps
  bool holds = false;
  bool converged = false;
};

struct StabilityReport {
  double s = 0.0, r = 0.0, t = 0.0;
  double coefficient = 0.0;  // r / (1 - (r t + s))
  double slack = 0.0;        // 2 cell diameters + tol
  bool target_converged = false;
  std::vector<StabilityRow> rows;
  bool all_hold = false;
  bool monotone = false;  // distances non-increasing within slack
};

// Throws ModelError when the models do not share maps and parameters, or when
// some model fails the one-step budget s + r t < 1.
StabilityReport stability_experiment(const std::vector<IfsmModel>& models, const IfsmModel& target,
                                     const StabilityOptions& opts = {});

}  // namespace ifsm
