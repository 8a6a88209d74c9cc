#include "ifsm/hutchinson.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ifsm/error.hpp"
#include "ifsm/parallel.hpp"

namespace ifsm {

namespace {

// All images tau_j(b_i), row-major in (i, j) order.
std::vector<double> images(const IfsmModel& model, const PointCloud& b) {
  if (b.dim() != model.dim()) throw DimensionMismatch("fractal_step: cloud dimension differs from the model");
  const std::size_t d = model.dim(), n = model.num_maps();
  std::vector<double> out(b.size() * n * d);
  parallel_for(
      b.size(),
      [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i)
          for (std::size_t j = 0; j < n; ++j) model.apply(j, b[i], {out.data() + (i * n + j) * d, d});
      },
      256);
  return out;
}

PointCloud snap_unique(std::vector<double> flat, std::size_t d, const Box& box, std::size_t resolution) {
  const std::size_t count = flat.size() / d;
  if (resolution == 0) {
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);
    auto row = [&](std::size_t k) { return flat.begin() + static_cast<std::ptrdiff_t>(k * d); };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return std::lexicographical_compare(row(a), row(a) + d, row(b), row(b) + d);
    });
    std::vector<double> out;
    for (std::size_t k = 0; k < order.size(); ++k) {
      if (k > 0 && std::equal(row(order[k]), row(order[k]) + d, row(order[k - 1]))) continue;
      out.insert(out.end(), row(order[k]), row(order[k]) + d);
    }
    return {d, std::move(out)};
  }
  const CellGrid grid(box, resolution);
  std::vector<std::uint64_t> keys(count);
  parallel_for(count, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k = lo; k < hi; ++k) keys[k] = grid.key({flat.data() + k * d, d});
  });
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  std::vector<double> out(keys.size() * d);
  for (std::size_t k = 0; k < keys.size(); ++k) grid.center_of_key(keys[k], {out.data() + k * d, d});
  return {d, std::move(out)};
}

}  // namespace

PointCloud fractal_step(const IfsmModel& model, const PointCloud& b, std::size_t resolution) {
  return snap_unique(images(model, b), model.dim(), model.domain(), resolution);
}

PointCloud fractal_step_M(const IfsmModel& model, const PointCloud& b, std::size_t depth, std::size_t resolution) {
  if (depth == 0) throw DomainError("fractal_step_M: depth must be >= 1");
  PointCloud cur = fractal_step(model, b, resolution);
  for (std::size_t k = 1; k < depth; ++k) cur = fractal_step(model, cur, resolution);
  return cur;
}

double median_of_last(const std::vector<double>& v, std::size_t count) {
  if (v.empty()) return 0.0;
  const std::size_t n = std::min(count, v.size());
  std::vector<double> tail(v.end() - static_cast<std::ptrdiff_t>(n), v.end());
  std::sort(tail.begin(), tail.end());
  return n % 2 == 1 ? tail[n / 2] : 0.5 * (tail[n / 2 - 1] + tail[n / 2]);
}

AttractorResult attractor(const IfsmModel& model, const PointCloud& b0, const AttractorOptions& opts) {
  double cell = 0.0;
  if (opts.resolution > 0) cell = CellGrid(model.domain(), opts.resolution).cell_diameter(model.metric());
  double tol = opts.tol;
  if (tol < 0.0) throw DomainError("attractor: tol must be > 0");
  if (tol == 0.0) {
    if (opts.resolution == 0) throw DomainError("attractor: tol must be > 0 when no grid is used");
    tol = 2.0 * cell;
  }
  AttractorResult res{b0, {}, tol};
  res.log.snap_error = 0.5 * cell;
  for (std::size_t k = 0; k < opts.max_iter; ++k) {
    if (res.cloud.size() > opts.max_points)
      throw CapacityExceeded("attractor: iterate has " + std::to_string(res.cloud.size()) +
                             " points, above max_points; lower the resolution");
    PointCloud next = fractal_step(model, res.cloud, opts.resolution);
    const double delta = hausdorff(next, res.cloud, model.metric());
    if (!res.log.deltas.empty() && res.log.deltas.back() > 0.0)
      res.log.ratios.push_back(delta / res.log.deltas.back());
    res.log.deltas.push_back(delta);
    res.cloud = std::move(next);
    res.log.iterations = k + 1;
    if (delta < tol) {
      res.log.converged = true;
      break;
    }
  }
  res.log.observed_ratio = median_of_last(res.log.ratios);
  return res;
}

CollageReport collage_report(const IfsmModel& model, const PointCloud& b, double s, const AttractorOptions& opts) {
  if (!(s > 0.0 && s < 1.0)) throw DomainError("collage_report: s must lie in (0, 1)");
  CollageReport rep;
  rep.s = s;
  rep.step_distance = hausdorff(fractal_step(model, b, opts.resolution), b, model.metric());
  rep.bound = rep.step_distance / (1.0 - s);
  const AttractorResult a = attractor(model, b, opts);
  rep.measured = hausdorff(b, a.cloud, model.metric());
  const double cell =
      opts.resolution > 0 ? CellGrid(model.domain(), opts.resolution).cell_diameter(model.metric()) : 0.0;
  rep.slack = 2.0 * cell + a.tol;
  rep.holds = rep.measured <= rep.bound + rep.slack;
  return rep;
}

}  // namespace ifsm
