#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "ifsm/measure.hpp"
#include "ifsm/metric.hpp"
#include "ifsm/rng.hpp"
#include "oracles.hpp"

namespace testing {

inline std::vector<oracle::Pt> to_points(const ifsm::PointCloud& c) {
  std::vector<oracle::Pt> out;
  for (std::size_t i = 0; i < c.size(); ++i) out.emplace_back(c[i].begin(), c[i].end());
  return out;
}

inline ifsm::PointCloud from_points(const std::vector<oracle::Pt>& pts) {
  std::vector<double> flat;
  for (const auto& p : pts) flat.insert(flat.end(), p.begin(), p.end());
  return ifsm::PointCloud(pts.front().size(), std::move(flat));
}

inline std::vector<std::pair<double, double>> to_line(const ifsm::DiscreteMeasure& mu) {
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < mu.size(); ++i) out.push_back({mu.atom(i)[0], mu.weight(i)});
  return out;
}

inline ifsm::DiscreteMeasure from_line(const std::vector<std::pair<double, double>>& v) {
  std::vector<double> x, w;
  for (auto [a, b] : v) {
    x.push_back(a);
    w.push_back(b);
  }
  return ifsm::normalize(ifsm::PointCloud(1, std::move(x)), std::move(w));
}

// n uniform points in the box.
inline ifsm::PointCloud random_cloud(ifsm::Rng& rng, const ifsm::Box& box, std::size_t n) {
  std::vector<double> flat;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < box.dim(); ++a) flat.push_back(rng.uniform(box.lo[a], box.hi[a]));
  return ifsm::PointCloud(box.dim(), std::move(flat));
}

// n uniform atoms in the box with weights drawn from (0, 1] and normalized.
inline ifsm::DiscreteMeasure random_measure(ifsm::Rng& rng, const ifsm::Box& box, std::size_t n) {
  ifsm::PointCloud atoms = random_cloud(rng, box, n);
  std::vector<double> w(n);
  for (auto& v : w) v = 1.0 - rng.uniform();
  return ifsm::normalize(atoms, std::move(w));
}

}  // namespace testing
