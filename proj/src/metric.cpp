#include "ifsm/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ifsm/error.hpp"
#include "ifsm/parallel.hpp"
#include "ifsm/rng.hpp"

namespace ifsm {

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::euclidean:
      return "euclidean";
    case Metric::max_coord:
      return "max_coord";
  }
  return "euclidean";
}

Metric parse_metric(std::string_view name) {
  if (name == "euclidean") return Metric::euclidean;
  if (name == "max_coord" || name == "max") return Metric::max_coord;
  throw DomainError("unknown metric '" + std::string(name) + "'");
}

double distance(Coords a, Coords b, Metric m) {
  if (a.size() != b.size())
    throw DimensionMismatch("distance: dimensions " + std::to_string(a.size()) + " and " +
                            std::to_string(b.size()));
  if (m == Metric::max_coord) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
  }
  if (a.size() == 1) return std::abs(a[0] - b[0]);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Box

Box::Box(std::vector<double> lo_, std::vector<double> hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
  if (lo.size() != hi.size()) throw DimensionMismatch("box: lo/hi dimension mismatch");
  if (lo.empty()) throw DomainError("box: dimension must be >= 1");
  for (std::size_t i = 0; i < lo.size(); ++i) {
    if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || lo[i] > hi[i])
      throw DomainError("box: invalid extent on axis " + std::to_string(i));
  }
}

Box Box::unit(std::size_t dim) { return Box(std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)); }

bool Box::contains(Coords p, double tol) const {
  if (p.size() != dim()) return false;
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] < lo[i] - tol || p[i] > hi[i] + tol) return false;
  return true;
}

double Box::diameter(Metric m) const { return distance(lo, hi, m); }

std::vector<Point> Box::corners() const {
  const std::size_t d = dim();
  std::vector<Point> out;
  out.reserve(std::size_t{1} << d);
  for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
    std::vector<double> c(d);
    for (std::size_t i = 0; i < d; ++i) c[i] = (mask >> i) & 1U ? hi[i] : lo[i];
    out.emplace_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// PointCloud

PointCloud::PointCloud(std::size_t dim, std::vector<double> flat) : dim_(dim), data_(std::move(flat)) {
  if (dim_ == 0) throw DomainError("point cloud: dimension must be >= 1");
  if (data_.empty()) throw DomainError("point cloud: must be nonempty");
  if (data_.size() % dim_ != 0) throw DimensionMismatch("point cloud: ragged coordinate buffer");
  std::vector<double> lo(dim_, std::numeric_limits<double>::infinity());
  std::vector<double> hi(dim_, -std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < data_.size(); ++k) {
    const double v = data_[k];
    if (!std::isfinite(v)) throw DomainError("point cloud: non-finite coordinate");
    const std::size_t axis = k % dim_;
    lo[axis] = std::min(lo[axis], v);
    hi[axis] = std::max(hi[axis], v);
  }
  box_ = Box(std::move(lo), std::move(hi));
}

namespace {
std::vector<double> flatten(const std::vector<Point>& points) {
  if (points.empty()) throw DomainError("point cloud: must be nonempty");
  const std::size_t d = points.front().dim();
  std::vector<double> flat;
  flat.reserve(points.size() * d);
  for (const auto& p : points) {
    if (p.dim() != d) throw DimensionMismatch("point cloud: points of different dimension");
    flat.insert(flat.end(), p.coords().begin(), p.coords().end());
  }
  return flat;
}
}  // namespace

PointCloud::PointCloud(const std::vector<Point>& points)
    : PointCloud(points.empty() ? 1 : points.front().dim(), flatten(points)) {}

PointCloud PointCloud::grid(const Box& box, const std::vector<std::size_t>& counts) {
  const std::size_t d = box.dim();
  if (counts.size() != d) throw DimensionMismatch("grid: counts/box dimension mismatch");
  std::size_t total = 1;
  for (auto c : counts) {
    if (c == 0) throw DomainError("grid: zero points along an axis");
    total *= c;
  }
  std::vector<double> flat;
  flat.reserve(total * d);
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t n = 0; n < total; ++n) {
    for (std::size_t a = 0; a < d; ++a) {
      const double t = counts[a] == 1 ? 0.5 : static_cast<double>(idx[a]) / static_cast<double>(counts[a] - 1);
      flat.push_back(box.lo[a] + t * (box.hi[a] - box.lo[a]));
    }
    for (std::size_t a = d; a-- > 0;) {
      if (++idx[a] < counts[a]) break;
      idx[a] = 0;
    }
  }
  PointCloud cloud(d, std::move(flat));
  cloud.grid_shape_ = counts;
  return cloud;
}

PointCloud PointCloud::grid(const Box& box, std::size_t per_axis) {
  return grid(box, std::vector<std::size_t>(box.dim(), per_axis));
}

// ---------------------------------------------------------------------------
// CellGrid

CellGrid::CellGrid(Box box, std::size_t resolution) : box_(std::move(box)), resolution_(resolution) {
  if (resolution_ == 0) throw DomainError("cell grid: resolution must be >= 1");
  double cells = 1.0;
  for (std::size_t i = 0; i < box_.dim(); ++i) cells *= static_cast<double>(resolution_);
  if (cells > 9.0e18) throw CapacityExceeded("cell grid: resolution^dim overflows the cell key");
}

double CellGrid::cell_width(std::size_t axis) const {
  return (box_.hi[axis] - box_.lo[axis]) / static_cast<double>(resolution_);
}

std::size_t CellGrid::axis_index(std::size_t axis, double x) const {
  const double lo = box_.lo[axis];
  const double hi = box_.hi[axis];
  const double width = hi - lo;
  const double slack = 1e-9 * std::max(width, 1.0);
  if (!(x >= lo - slack && x <= hi + slack))
    throw DomainError("coordinate " + std::to_string(x) + " outside the box on axis " + std::to_string(axis));
  if (width <= 0.0) return 0;
  const double u = (x - lo) / width * static_cast<double>(resolution_);
  // ceil(u) - 1 places exact boundaries in the lower cell.
  const double k = std::ceil(u) - 1.0;
  if (k <= 0.0) return 0;
  if (k >= static_cast<double>(resolution_ - 1)) return resolution_ - 1;
  return static_cast<std::size_t>(k);
}

std::uint64_t CellGrid::key(Coords p) const {
  if (p.size() != dim()) throw DimensionMismatch("cell grid: point dimension mismatch");
  std::uint64_t k = 0;
  for (std::size_t a = 0; a < p.size(); ++a) k = k * resolution_ + axis_index(a, p[a]);
  return k;
}

void CellGrid::center_of_key(std::uint64_t key, std::span<double> out) const {
  for (std::size_t a = dim(); a-- > 0;) {
    const std::uint64_t i = key % resolution_;
    key /= resolution_;
    out[a] = box_.lo[a] + (static_cast<double>(i) + 0.5) * cell_width(a);
  }
}

double CellGrid::cell_diameter(Metric m) const {
  std::vector<double> zero(dim(), 0.0), w(dim());
  for (std::size_t a = 0; a < dim(); ++a) w[a] = cell_width(a);
  return distance(zero, w, m);
}

// ---------------------------------------------------------------------------
// NearestIndex

NearestIndex::NearestIndex(const PointCloud& cloud, Metric m) : cloud_(&cloud), metric_(m) {
  const std::size_t d = cloud.dim();
  const std::size_t n = cloud.size();
  const auto& box = cloud.bounding_box();
  const double per_axis = std::max(1.0, std::floor(std::pow(static_cast<double>(n), 1.0 / static_cast<double>(d))));
  cells_per_axis_.assign(d, 1);
  lo_ = box.lo;
  width_.assign(d, 1.0);
  min_width_ = std::numeric_limits<double>::infinity();
  std::size_t total = 1;
  for (std::size_t a = 0; a < d; ++a) {
    const double extent = box.hi[a] - box.lo[a];
    if (extent > 0.0) {
      cells_per_axis_[a] = static_cast<std::size_t>(std::min(per_axis, 1.0e6));
      width_[a] = extent / static_cast<double>(cells_per_axis_[a]);
      min_width_ = std::min(min_width_, width_[a]);
    }
    total *= cells_per_axis_[a];
  }
  if (!std::isfinite(min_width_)) min_width_ = 0.0;  // all points coincide

  auto cell_of = [&](Coords p) {
    std::size_t key = 0;
    for (std::size_t a = 0; a < d; ++a) {
      std::size_t c = 0;
      if (cells_per_axis_[a] > 1) {
        const double u = std::floor((p[a] - lo_[a]) / width_[a]);
        c = u <= 0.0 ? 0 : std::min(cells_per_axis_[a] - 1, static_cast<std::size_t>(u));
      }
      key = key * cells_per_axis_[a] + c;
    }
    return key;
  };
  std::vector<std::size_t> cell(n);
  bucket_start_.assign(total + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    cell[i] = cell_of(cloud.point(i));
    ++bucket_start_[cell[i] + 1];
  }
  for (std::size_t c = 0; c < total; ++c) bucket_start_[c + 1] += bucket_start_[c];
  bucket_items_.resize(n);
  std::vector<std::size_t> fill(bucket_start_.begin(), bucket_start_.end() - 1);
  for (std::size_t i = 0; i < n; ++i) bucket_items_[fill[cell[i]]++] = i;
}

std::pair<std::size_t, double> NearestIndex::search(Coords q) const {
  const std::size_t d = cells_per_axis_.size();
  if (q.size() != d) throw DimensionMismatch("nearest: query dimension mismatch");
  std::vector<long> c(d);
  long max_extent = 1;
  for (std::size_t a = 0; a < d; ++a) {
    long ca = 0;
    if (cells_per_axis_[a] > 1) {
      const double u = std::floor((q[a] - lo_[a]) / width_[a]);
      ca = u <= 0.0 ? 0 : std::min<long>(static_cast<long>(cells_per_axis_[a]) - 1, static_cast<long>(u));
    }
    c[a] = ca;
    max_extent = std::max(max_extent, static_cast<long>(cells_per_axis_[a]));
  }

  std::size_t best_i = 0;
  double best = std::numeric_limits<double>::infinity();
  auto scan_cell = [&](const std::vector<long>& cell) {
    std::size_t key = 0;
    for (std::size_t a = 0; a < d; ++a) key = key * cells_per_axis_[a] + static_cast<std::size_t>(cell[a]);
    for (std::size_t k = bucket_start_[key]; k < bucket_start_[key + 1]; ++k) {
      const std::size_t i = bucket_items_[k];
      const double dist = distance(q, cloud_->point(i), metric_);
      if (dist < best || (dist == best && i < best_i)) {
        best = dist;
        best_i = i;
      }
    }
  };

  std::vector<long> cell(d), lo(d), hi(d);
  for (long ring = 0; ring <= max_extent; ++ring) {
    if (ring == 0) {
      scan_cell(c);
    } else {
      // Each ring cell is visited once: `first` is the lowest axis sitting on
      // the ring face; axes before it are strictly interior.
      for (std::size_t first = 0; first < d; ++first) {
        for (const long side : {-ring, ring}) {
          const long fixed = c[first] + side;
          if (fixed < 0 || fixed >= static_cast<long>(cells_per_axis_[first])) continue;
          bool empty = false;
          for (std::size_t a = 0; a < d; ++a) {
            const long n_a = static_cast<long>(cells_per_axis_[a]);
            if (a == first) {
              lo[a] = hi[a] = fixed;
            } else if (a < first) {
              lo[a] = std::max(0L, c[a] - ring + 1);
              hi[a] = std::min(n_a - 1, c[a] + ring - 1);
            } else {
              lo[a] = std::max(0L, c[a] - ring);
              hi[a] = std::min(n_a - 1, c[a] + ring);
            }
            if (lo[a] > hi[a]) empty = true;
          }
          if (empty) continue;
          cell = lo;
          while (true) {
            scan_cell(cell);
            std::size_t a = d;
            while (a-- > 0) {
              if (++cell[a] <= hi[a]) break;
              cell[a] = lo[a];
            }
            if (a == static_cast<std::size_t>(-1)) break;
          }
        }
      }
    }
    // Unscanned points lie at least ring * min_width away along some axis.
    if (best < static_cast<double>(ring) * min_width_) break;
  }
  return {best_i, best};
}

double NearestIndex::nearest_distance(Coords q) const { return search(q).second; }
std::size_t NearestIndex::nearest(Coords q) const { return search(q).first; }

// ---------------------------------------------------------------------------
// Hausdorff

namespace {
void require_same_dim(const PointCloud& a, const PointCloud& b) {
  if (a.dim() != b.dim())
    throw DimensionMismatch("hausdorff: dimensions " + std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
}

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}
}  // namespace

double directed_hausdorff_brute(const PointCloud& from, const PointCloud& to, Metric m) {
  require_same_dim(from, to);
  std::vector<double> nearest(from.size());
  parallel_for(from.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < to.size(); ++j) best = std::min(best, distance(from[i], to[j], m));
      nearest[i] = best;
    }
  }, 64);
  return max_of(nearest);
}

double hausdorff_brute(const PointCloud& a, const PointCloud& b, Metric m) {
  return std::max(directed_hausdorff_brute(a, b, m), directed_hausdorff_brute(b, a, m));
}

namespace {
double directed_indexed(const PointCloud& from, const PointCloud& to, Metric m) {
  const NearestIndex index(to, m);
  std::vector<double> nearest(from.size());
  parallel_for(from.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) nearest[i] = index.nearest_distance(from[i]);
  }, 1024);
  return max_of(nearest);
}
}  // namespace

double hausdorff_indexed(const PointCloud& a, const PointCloud& b, Metric m) {
  require_same_dim(a, b);
  return std::max(directed_indexed(a, b, m), directed_indexed(b, a, m));
}

double hausdorff(const PointCloud& a, const PointCloud& b, Metric m) {
  require_same_dim(a, b);
  const double pairs = static_cast<double>(a.size()) * static_cast<double>(b.size());
  return pairs > kHausdorffIndexThreshold ? hausdorff_indexed(a, b, m) : hausdorff_brute(a, b, m);
}

// ---------------------------------------------------------------------------
// Lipschitz estimation

double estimate_lipschitz(const PointMap& f, const PointCloud& domain, Metric m, const LipschitzOptions& opts) {
  const std::size_t n = domain.size();
  bool distinct = false;
  for (std::size_t i = 1; i < n && !distinct; ++i) distinct = distance(domain[0], domain[i], m) > 0.0;
  if (!distinct) throw DomainError("estimate_lipschitz: domain needs at least 2 distinct points");
  if (opts.pairs == 0) throw DomainError("estimate_lipschitz: pairs must be >= 1");

  std::vector<Point> images;
  images.reserve(n);
  for (std::size_t i = 0; i < n; ++i) images.push_back(f(domain[i]));

  double best = 0.0;
  auto consider = [&](std::size_t i, std::size_t j) {
    const double dx = distance(domain[i], domain[j], m);
    if (dx <= 0.0) return;
    best = std::max(best, distance(images[i], images[j], m) / dx);
  };

  Rng rng(opts.seed);
  for (std::size_t k = 0; k < opts.pairs; ++k) {
    const auto i = static_cast<std::size_t>(rng.below(n));
    auto j = static_cast<std::size_t>(rng.below(n - 1));
    if (j >= i) ++j;
    consider(i, j);
  }

  if (const auto& shape = domain.grid_shape()) {
    const std::size_t d = shape->size();
    std::vector<std::size_t> stride(d, 1);
    for (std::size_t a = d - 1; a-- > 0;) stride[a] = stride[a + 1] * (*shape)[a + 1];
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t a = 0; a < d; ++a) {
        const std::size_t coord = (i / stride[a]) % (*shape)[a];
        if (coord + 1 < (*shape)[a]) consider(i, i + stride[a]);
      }
    }
  }
  return best;
}

}  // namespace ifsm
