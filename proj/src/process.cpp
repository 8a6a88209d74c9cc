#include "ifsm/process.hpp"

#include <cmath>
#include <limits>

#include "ifsm/error.hpp"
#include "ifsm/parallel.hpp"

namespace ifsm {

std::size_t choose_index(std::span<const double> weights, double u) {
  double c = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    if (weights[j] > 0.0) last_positive = j;
    c += weights[j];
    if (u < c) return j;
  }
  return last_positive;
}

Trajectory sample_trajectory(const IfsmModel& model, Coords z0, std::size_t steps, Rng& rng) {
  const std::size_t d = model.dim(), n = model.num_maps();
  if (z0.size() != d) throw DimensionMismatch("sample_trajectory: start point dimension mismatch");
  if (!model.domain().contains(z0, kEscapeTolerance)) throw DomainError("sample_trajectory: start point outside the domain");
  Trajectory t;
  t.dim = d;
  t.points.resize((steps + 1) * d);
  t.chosen.resize(steps);
  std::copy(z0.begin(), z0.end(), t.points.begin());
  std::vector<double> q(n);
  for (std::size_t k = 0; k < steps; ++k) {
    const Coords z = t.point(k);
    model.weights_into(z, q);
    const std::size_t j = choose_index(q, rng.uniform());
    t.chosen[k] = static_cast<std::uint32_t>(j);
    model.apply(j, z, {t.points.data() + (k + 1) * d, d});
  }
  return t;
}

Trajectory sample_trajectory(const IfsmModel& model, Coords z0, std::size_t steps, std::uint64_t seed) {
  Rng rng(seed);
  Trajectory t = sample_trajectory(model, z0, steps, rng);
  t.seed = seed;
  return t;
}

DiscreteMeasure empirical_measure(const Trajectory& t, std::size_t burn_in, const Box& box, std::size_t resolution) {
  if (burn_in >= t.size()) throw DomainError("empirical_measure: burn-in leaves no points");
  std::vector<double> flat(t.points.begin() + static_cast<std::ptrdiff_t>(burn_in * t.dim), t.points.end());
  DiscreteMeasure mu = DiscreteMeasure::uniform(PointCloud(t.dim, std::move(flat)));
  if (resolution == 0) return merge_duplicates(mu);
  return bin_to_grid(mu, CellGrid(box, resolution));
}

bool ExpectationReport::within(double n_sigma) const {
  return std::abs(mc_mean - exact) <= n_sigma * std_error + 1e-12 * std::max(1.0, std::abs(exact));
}

std::vector<PointCloud> ensemble_positions(const IfsmModel& model, Coords x, std::size_t steps, std::size_t n_samples,
                                           std::uint64_t seed) {
  if (n_samples == 0) throw DomainError("ensemble_positions: need at least one sample");
  const std::size_t d = model.dim();
  std::vector<std::vector<double>> flat(steps + 1, std::vector<double>(n_samples * d));
  parallel_for(
      n_samples,
      [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
          Rng rng(stream_seed(seed, i));
          const Trajectory t = sample_trajectory(model, x, steps, rng);
          for (std::size_t k = 0; k <= steps; ++k) {
            const auto p = t.point(k);
            std::copy(p.begin(), p.end(), flat[k].begin() + static_cast<std::ptrdiff_t>(i * d));
          }
        }
      },
      1024);
  std::vector<PointCloud> out;
  out.reserve(steps + 1);
  for (auto& f : flat) out.emplace_back(d, std::move(f));
  return out;
}

ExpectationReport conditional_expectation_check(const IfsmModel& model, const SampledFunction& f, Coords x,
                                                std::size_t k, std::size_t n_samples, std::uint64_t seed) {
  if (k == 0) throw DomainError("conditional_expectation_check: k must be >= 1");
  if (n_samples == 0) throw DomainError("conditional_expectation_check: n_samples must be >= 1");
  std::vector<double> values(n_samples);
  parallel_for(
      n_samples,
      [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
          Rng rng(stream_seed(seed, i));
          const Trajectory t = sample_trajectory(model, x, k, rng);
          values[i] = f(t.point(k));
        }
      },
      1024);
  ExpectationReport rep;
  rep.k = k;
  rep.samples = n_samples;
  // Shifted by the first value so a constant f reproduces its value exactly.
  const double shift = values[0];
  double sum = 0.0;
  for (double v : values) sum += v - shift;
  rep.mc_mean = shift + sum / static_cast<double>(n_samples);
  if (n_samples > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - rep.mc_mean) * (v - rep.mc_mean);
    rep.std_error = std::sqrt(ss / static_cast<double>(n_samples - 1) / static_cast<double>(n_samples));
  }
  rep.exact = transfer_apply_M(model, f, x, k);
  const double diff = rep.mc_mean - rep.exact;
  if (rep.std_error > 0.0) {
    rep.z_score = diff / rep.std_error;
  } else {
    rep.z_score = std::abs(diff) <= 1e-12 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
  }
  return rep;
}

}  // namespace ifsm
