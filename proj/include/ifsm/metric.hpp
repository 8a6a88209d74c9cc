#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ifsm {

enum class Metric {
  euclidean,
  max_coord,  // d(x, y) = max_i |x_i - y_i|
};

std::string_view to_string(Metric m);
Metric parse_metric(std::string_view name);

using Coords = std::span<const double>;

class Point {
 public:
  Point() = default;
  Point(std::initializer_list<double> c) : coords_(c) {}
  explicit Point(std::vector<double> c) : coords_(std::move(c)) {}
  explicit Point(Coords c) : coords_(c.begin(), c.end()) {}

  std::size_t dim() const { return coords_.size(); }
  double operator[](std::size_t i) const { return coords_[i]; }
  double& operator[](std::size_t i) { return coords_[i]; }
  const std::vector<double>& coords() const { return coords_; }
  std::vector<double>& coords() { return coords_; }
  operator Coords() const { return coords_; }

  friend bool operator==(const Point&, const Point&) = default;

 private:
  std::vector<double> coords_;
};

double distance(Coords a, Coords b, Metric m);

// Axis-aligned box [lo_i, hi_i] per axis.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  Box() = default;
  Box(std::vector<double> lo_, std::vector<double> hi_);
  static Box unit(std::size_t dim);

  std::size_t dim() const { return lo.size(); }
  bool contains(Coords p, double tol = 0.0) const;
  double diameter(Metric m) const;
  // All 2^D corners in binary-counter order (axis 0 fastest).
  std::vector<Point> corners() const;

  friend bool operator==(const Box&, const Box&) = default;
};

// Nonempty finite set of points of a common dimension, stored row-major.
class PointCloud {
 public:
  PointCloud(std::size_t dim, std::vector<double> flat);
  explicit PointCloud(const std::vector<Point>& points);

  // Uniform lattice including both faces: counts[i] >= 1 points along axis i
  // (a single point sits at the axis midpoint). Records the lattice shape so
  // neighbour pairs can be enumerated.
  static PointCloud grid(const Box& box, const std::vector<std::size_t>& counts);
  static PointCloud grid(const Box& box, std::size_t per_axis);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return data_.size() / dim_; }
  Coords point(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  Coords operator[](std::size_t i) const { return point(i); }
  const std::vector<double>& flat() const { return data_; }
  const Box& bounding_box() const { return box_; }

  // Lattice shape when built by grid(); points are ordered with the last
  // axis fastest.
  const std::optional<std::vector<std::size_t>>& grid_shape() const { return grid_shape_; }

 private:
  std::size_t dim_;
  std::vector<double> data_;
  Box box_;
  std::optional<std::vector<std::size_t>> grid_shape_;
};

// Uniform partition of a box into `resolution` cells per axis. Used for
// snapping point clouds and binning measures. A coordinate lying exactly on
// the boundary between two cells belongs to the lower-index cell.
class CellGrid {
 public:
  CellGrid(Box box, std::size_t resolution);

  const Box& box() const { return box_; }
  std::size_t resolution() const { return resolution_; }
  std::size_t dim() const { return box_.dim(); }

  // Per-axis cell index. Throws DomainError if p is outside the box by more
  // than a relative 1e-9 of the axis width.
  std::size_t axis_index(std::size_t axis, double x) const;
  // Lexicographic key (axis 0 most significant).
  std::uint64_t key(Coords p) const;
  void center_of_key(std::uint64_t key, std::span<double> out) const;
  double cell_width(std::size_t axis) const;
  double cell_diameter(Metric m) const;
  // Half the cell diameter: worst-case displacement of a snapped point.
  double snap_error(Metric m) const { return 0.5 * cell_diameter(m); }

 private:
  Box box_;
  std::size_t resolution_;
};

// Bucketed nearest-neighbour search over a fixed cloud. Exact: returns the
// same minimum distance a linear scan would.
class NearestIndex {
 public:
  NearestIndex(const PointCloud& cloud, Metric m);

  double nearest_distance(Coords q) const;
  std::size_t nearest(Coords q) const;

 private:
  std::pair<std::size_t, double> search(Coords q) const;

  const PointCloud* cloud_;
  Metric metric_;
  std::vector<std::size_t> cells_per_axis_;
  std::vector<double> lo_;
  std::vector<double> width_;
  double min_width_ = 0.0;
  std::vector<std::size_t> bucket_start_;
  std::vector<std::size_t> bucket_items_;
};

double directed_hausdorff_brute(const PointCloud& from, const PointCloud& to, Metric m);
double hausdorff_brute(const PointCloud& a, const PointCloud& b, Metric m);
double hausdorff_indexed(const PointCloud& a, const PointCloud& b, Metric m);

// Brute force below kIndexThreshold point pairs, bucketed index above.
inline constexpr double kHausdorffIndexThreshold = 1e6;
double hausdorff(const PointCloud& a, const PointCloud& b, Metric m);

using PointMap = std::function<Point(Coords)>;

struct LipschitzOptions {
  std::size_t pairs = 10000;
  std::uint64_t seed = 0x5eed;
};

// Largest observed ratio d(f(x), f(y)) / d(x, y) over seeded random pairs
// plus, for lattice domains, all axis-neighbour pairs. A lower bound on the
// true constant.
double estimate_lipschitz(const PointMap& f, const PointCloud& domain, Metric m,
                          const LipschitzOptions& opts = {});

}  // namespace ifsm
