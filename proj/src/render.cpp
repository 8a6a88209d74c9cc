#include "ifsm/render.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ifsm/error.hpp"

namespace ifsm {

namespace {

std::size_t pixel(double x, double lo, double hi, std::size_t count) {
  const double width = hi - lo;
  const double slack = 1e-9 * std::max(width, 1.0);
  if (!(x >= lo - slack && x <= hi + slack)) throw DomainError("render: point outside the image box");
  if (width <= 0.0) return 0;
  const double r = std::ceil((x - lo) / width * static_cast<double>(count)) - 1.0;
  if (r <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(r), count - 1);
}

void check(std::size_t dim, const Box& box, std::size_t width, std::size_t height) {
  if (dim < 1 || dim > 2) throw DimensionMismatch("render: unsupported dimension " + std::to_string(dim) + " (1 or 2 only)");
  if (box.dim() != dim) throw DimensionMismatch("render: box dimension differs from the data");
  if (width == 0 || height == 0) throw DomainError("render: width and height must be >= 1");
}

std::size_t index_of(Coords p, const Box& box, std::size_t width, std::size_t height) {
  const std::size_t col = pixel(p[0], box.lo[0], box.hi[0], width);
  if (p.size() == 1) return col;
  const std::size_t row = height - 1 - pixel(p[1], box.lo[1], box.hi[1], height);
  return row * width + col;
}

std::string emit(const std::vector<int>& pix, std::size_t dim, std::size_t width, std::size_t height) {
  std::string out = "P2\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  for (std::size_t r = 0; r < height; ++r) {
    const std::size_t base = dim == 1 ? 0 : r * width;
    for (std::size_t c = 0; c < width; ++c) {
      if (c) out += ' ';
      out += std::to_string(pix[base + c]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace

std::string render_measure(const DiscreteMeasure& mu, const Box& box, std::size_t width, std::size_t height) {
  check(mu.dim(), box, width, height);
  const std::size_t cells = mu.dim() == 1 ? width : width * height;
  std::vector<double> mass(cells, 0.0);
  for (std::size_t i = 0; i < mu.size(); ++i) mass[index_of(mu.atom(i), box, width, height)] += mu.weight(i);
  const double top = *std::max_element(mass.begin(), mass.end());
  std::vector<int> pix(cells, 0);
  if (top > 0.0)
    for (std::size_t k = 0; k < cells; ++k) pix[k] = static_cast<int>(std::lround(255.0 * mass[k] / top));
  return emit(pix, mu.dim(), width, height);
}

std::string render_cloud(const PointCloud& cloud, const Box& box, std::size_t width, std::size_t height) {
  check(cloud.dim(), box, width, height);
  const std::size_t cells = cloud.dim() == 1 ? width : width * height;
  std::vector<int> pix(cells, 0);
  for (std::size_t i = 0; i < cloud.size(); ++i) pix[index_of(cloud[i], box, width, height)] = 255;
  return emit(pix, cloud.dim(), width, height);
}

}  // namespace ifsm
