#pragma once

#include <string>

#include "ifsm/measure.hpp"
#include "ifsm/metric.hpp"

namespace ifsm {

// "%.17g": reads back to the same double.
std::string format_double(double v);

// Clouds: header x0,...,x{D-1}, one row per point.
std::string cloud_to_csv(const PointCloud& cloud);
PointCloud cloud_from_csv(const std::string& text);
// Measures: header x0,...,x{D-1},weight.
std::string measure_to_csv(const DiscreteMeasure& mu);
DiscreteMeasure measure_from_csv(const std::string& text);

std::string read_file(const std::string& path);
// Creates missing parent directories.
void write_file(const std::string& path, const std::string& content);

}  // namespace ifsm
