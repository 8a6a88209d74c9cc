#pragma once

#include <cstddef>
#include <vector>

#include "ifsm/metric.hpp"
#include "ifsm/model.hpp"

namespace ifsm {

// F(B) = union over atoms j of tau_j(B). With resolution > 0 each image is
// snapped to the center of its cell in the model's domain grid and duplicates
// are dropped; output is in lexicographic cell order. resolution == 0 keeps
// exact images and removes only bitwise duplicates (sorted lexicographically).
PointCloud fractal_step(const IfsmModel& model, const PointCloud& b, std::size_t resolution);

// M-fold composed step: the union of tau_{lambda^M}(B) over all M-tuples, with
// snapping after every step.
PointCloud fractal_step_M(const IfsmModel& model, const PointCloud& b, std::size_t depth, std::size_t resolution);

struct IterationLog {
  std::vector<double> deltas;  // distance between successive iterates
  std::vector<double> ratios;  // deltas[k] / deltas[k-1]
  double observed_ratio = 0.0; // median of the last five ratios
  bool converged = false;
  std::size_t iterations = 0;
  double snap_error = 0.0;
};

double median_of_last(const std::vector<double>& v, std::size_t count = 5);

struct AttractorOptions {
  std::size_t resolution = 729;
  double tol = 0.0;  // 0 selects twice the cell diameter
  std::size_t max_iter = 200;
  std::size_t max_points = 5'000'000;
};

struct AttractorResult {
  PointCloud cloud;
  IterationLog log;
  double tol = 0.0;
};

// Iterates F from b0 until the Hausdorff delta drops below tol.
AttractorResult attractor(const IfsmModel& model, const PointCloud& b0, const AttractorOptions& opts = {});

struct CollageReport {
  double s = 0.0;
  double step_distance = 0.0;  // h(F(B), B)
  double bound = 0.0;          // step_distance / (1 - s)
  double measured = 0.0;       // h(B, A) against the computed attractor
  double slack = 0.0;
  bool holds = false;
};

CollageReport collage_report(const IfsmModel& model, const PointCloud& b, double s, const AttractorOptions& opts = {});

}  // namespace ifsm
