#include "ifsm/markov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ifsm/error.hpp"
#include "ifsm/hutchinson.hpp"
#include "ifsm/parallel.hpp"

namespace ifsm {

SampledFunction::SampledFunction(PointCloud grid, std::vector<double> values, Metric metric,
                                 std::optional<double> lipschitz)
    : grid_(std::make_shared<const PointCloud>(std::move(grid))),
      values_(std::move(values)),
      metric_(metric),
      lipschitz_(lipschitz) {
  if (values_.size() != grid_->size())
    throw DimensionMismatch("sampled function: " + std::to_string(values_.size()) + " values for " +
                            std::to_string(grid_->size()) + " grid points");
  for (double v : values_)
    if (!std::isfinite(v)) throw DomainError("sampled function: values must be finite");
  // Per-axis rounding finds the lowest-index nearest point only for the
  // euclidean metric; max_coord has ties across axes.
  const auto& shape = grid_->grid_shape();
  if (shape && metric_ == Metric::euclidean) {
    counts_ = *shape;
    const Box& bb = grid_->bounding_box();
    for (std::size_t a = 0; a < counts_.size(); ++a) {
      lo_.push_back(bb.lo[a]);
      step_.push_back(counts_[a] > 1 ? (bb.hi[a] - bb.lo[a]) / static_cast<double>(counts_[a] - 1) : 0.0);
    }
  } else {
    index_ = std::make_shared<const NearestIndex>(*grid_, metric_);
  }
}

SampledFunction SampledFunction::sample(PointCloud grid, const std::function<double(Coords)>& f, Metric metric,
                                        std::optional<double> lipschitz) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) v[i] = f(grid[i]);
  return {std::move(grid), std::move(v), metric, lipschitz};
}

SampledFunction SampledFunction::constant(const Box& box, double c) {
  return {PointCloud::grid(box, 1), {c}, Metric::euclidean, 0.0};
}

std::size_t SampledFunction::nearest(Coords x) const {
  if (x.size() != grid_->dim()) throw DimensionMismatch("sampled function: point dimension mismatch");
  if (index_) return index_->nearest(x);
  std::size_t idx = 0;
  for (std::size_t a = 0; a < counts_.size(); ++a) {
    std::size_t k = 0;
    if (counts_[a] > 1) {
      const double u = (x[a] - lo_[a]) / step_[a];
      const double r = std::ceil(u - 0.5);  // exact halves go to the lower point
      k = r <= 0.0 ? 0 : std::min(static_cast<std::size_t>(r), counts_[a] - 1);
    }
    idx = idx * counts_[a] + k;
  }
  return idx;
}

double transfer_apply(const IfsmModel& model, const SampledFunction& f, Coords x) {
  const std::size_t n = model.num_maps();
  std::vector<double> q(n), img(model.dim());
  model.weights_into(x, q);
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    model.apply(j, x, img);
    s += q[j] * f(img);
  }
  return s;
}

double transfer_apply_M(const IfsmModel& model, const SampledFunction& f, Coords x, std::size_t depth,
                        const ComposeOptions& opts) {
  const ComposedMeasure cm = model.composed_measure(depth, x, opts);
  double s = 0.0;
  for (std::size_t k = 0; k < cm.size(); ++k) s += cm.weights[k] * f(model.compose_map(cm.tuple(k), x));
  return s;
}

namespace {

DiscreteMeasure bin_weighted(const std::vector<double>& flat, const std::vector<double>& w, std::size_t d,
                             const Box& box, std::size_t resolution) {
  const std::size_t count = w.size();
  if (resolution == 0) {
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);
    auto row = [&](std::size_t k) { return flat.begin() + static_cast<std::ptrdiff_t>(k * d); };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::lexicographical_compare(row(a), row(a) + d, row(b), row(b) + d);
    });
    std::vector<double> out, mass;
    for (std::size_t k = 0; k < count;) {
      std::size_t e = k;
      double m = 0.0;
      while (e < count && std::equal(row(order[k]), row(order[k]) + d, row(order[e]))) m += w[order[e++]];
      if (m > 0.0) {
        out.insert(out.end(), row(order[k]), row(order[k]) + d);
        mass.push_back(m);
      }
      k = e;
    }
    return normalize(PointCloud(d, std::move(out)), std::move(mass));
  }
  const CellGrid grid(box, resolution);
  std::vector<std::pair<std::uint64_t, std::size_t>> keyed(count);
  parallel_for(count, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k = lo; k < hi; ++k) keyed[k] = {grid.key({flat.data() + k * d, d}), k};
  });
  std::sort(keyed.begin(), keyed.end());
  std::vector<double> out, mass, center(d);
  for (std::size_t k = 0; k < count;) {
    const auto key = keyed[k].first;
    double m = 0.0;
    for (; k < count && keyed[k].first == key; ++k) m += w[keyed[k].second];
    if (m == 0.0) continue;
    grid.center_of_key(key, center);
    out.insert(out.end(), center.begin(), center.end());
    mass.push_back(m);
  }
  return normalize(PointCloud(d, std::move(out)), std::move(mass));
}

}  // namespace

DiscreteMeasure markov_push(const IfsmModel& model, const DiscreteMeasure& mu, std::size_t resolution) {
  if (mu.dim() != model.dim()) throw DimensionMismatch("markov_push: measure dimension differs from the model");
  const std::size_t d = model.dim(), n = model.num_maps();
  std::vector<double> flat(mu.size() * n * d), w(mu.size() * n);
  parallel_for(
      mu.size(),
      [&](std::size_t lo, std::size_t hi) {
        std::vector<double> q(n);
        for (std::size_t i = lo; i < hi; ++i) {
          model.weights_into(mu.atom(i), q);
          for (std::size_t j = 0; j < n; ++j) {
            model.apply(j, mu.atom(i), {flat.data() + (i * n + j) * d, d});
            w[i * n + j] = mu.weight(i) * q[j];
          }
        }
      },
      256);
  return bin_weighted(flat, w, d, model.domain(), resolution);
}

DiscreteMeasure markov_push_M(const IfsmModel& model, const DiscreteMeasure& mu, std::size_t depth,
                              std::size_t resolution) {
  if (depth == 0) throw DomainError("markov_push_M: depth must be >= 1");
  DiscreteMeasure cur = markov_push(model, mu, resolution);
  for (std::size_t k = 1; k < depth; ++k) cur = markov_push(model, cur, resolution);
  return cur;
}

InvariantResult invariant_measure(const IfsmModel& model, const std::optional<DiscreteMeasure>& mu0,
                                  const InvariantOptions& opts) {
  if (!(opts.tol > 0.0)) throw DomainError("invariant_measure: tol must be > 0");
  InvariantLog log;
  if (opts.resolution > 0) log.cell_diameter = CellGrid(model.domain(), opts.resolution).cell_diameter(model.metric());
  if (opts.contraction && *opts.contraction < 1.0)
    log.residual_bound = log.cell_diameter / (2.0 * (1.0 - *opts.contraction));
  DiscreteMeasure cur = [&] {
    if (mu0) return *mu0;
    if (opts.resolution == 0) throw DomainError("invariant_measure: an initial measure is required without a grid");
    return uniform_grid_measure(CellGrid(model.domain(), opts.resolution));
  }();
  for (std::size_t k = 0; k < opts.max_iter; ++k) {
    DiscreteMeasure next = markov_push(model, cur, opts.resolution);
    const double delta = wasserstein1(next, cur, model.metric());
    if (!log.deltas.empty() && log.deltas.back() > 0.0) log.ratios.push_back(delta / log.deltas.back());
    log.deltas.push_back(delta);
    cur = std::move(next);
    log.iterations = k + 1;
    if (delta < opts.tol) {
      log.converged = true;
      break;
    }
  }
  log.observed_ratio = median_of_last(log.ratios);
  return {std::move(cur), std::move(log)};
}

}  // namespace ifsm
