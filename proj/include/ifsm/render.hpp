#pragma once

#include <cstddef>
#include <string>

#include "ifsm/measure.hpp"
#include "ifsm/metric.hpp"

namespace ifsm {

// Plain-text PGM ("P2", maxval 255) of a 1D or 2D measure or cloud over box.
// Axis 0 runs left to right; in 2D row 0 is the top (largest axis-1 value).
// 1D inputs repeat the same row `height` times. Pixel boundaries follow the
// cell-grid rule: a coordinate on a boundary belongs to the lower pixel.
// Measures: intensity round(255 * mass / max mass). Clouds: 255 where any
// point falls, 0 elsewhere.
std::string render_measure(const DiscreteMeasure& mu, const Box& box, std::size_t width, std::size_t height);
std::string render_cloud(const PointCloud& cloud, const Box& box, std::size_t width, std::size_t height);

}  // namespace ifsm
