#include "ifsm/csv.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "ifsm/error.hpp"

namespace ifsm {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r' && c != ' ' && c != '\t') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ModelError("csv: malformed number '" + s + "' on line " + std::to_string(line));
  return v;
}

// Parses a table; returns the column count and the row-major values.
std::pair<std::vector<std::string>, std::vector<double>> table(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  std::vector<double> values;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto cells = split(line);
    if (header.empty()) {
      header = std::move(cells);
      continue;
    }
    if (cells.size() != header.size())
      throw ModelError("csv: line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                       " fields, expected " + std::to_string(header.size()));
    for (const auto& c : cells) values.push_back(parse(c, lineno));
  }
  if (header.empty()) throw ModelError("csv: missing header");
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string expect = "x" + std::to_string(i);
    if (header[i] != expect && !(i + 1 == header.size() && header[i] == "weight"))
      throw ModelError("csv: unexpected column '" + header[i] + "'");
  }
  return {header, values};
}

void append_row(std::string& out, Coords p) {
  for (std::size_t a = 0; a < p.size(); ++a) {
    if (a) out += ',';
    out += format_double(p[a]);
  }
}

std::string header(std::size_t d, bool weight) {
  std::string h;
  for (std::size_t a = 0; a < d; ++a) {
    if (a) h += ',';
    h += "x" + std::to_string(a);
  }
  if (weight) h += ",weight";
  return h + "\n";
}

}  // namespace

std::string cloud_to_csv(const PointCloud& cloud) {
  std::string out = header(cloud.dim(), false);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    append_row(out, cloud[i]);
    out += '\n';
  }
  return out;
}

PointCloud cloud_from_csv(const std::string& text) {
  auto [cols, values] = table(text);
  if (cols.back() == "weight") throw ModelError("csv: expected a point cloud, found a weight column");
  if (values.empty()) throw ModelError("csv: no points");
  return {cols.size(), std::move(values)};
}

std::string measure_to_csv(const DiscreteMeasure& mu) {
  std::string out = header(mu.dim(), true);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    append_row(out, mu.atom(i));
    out += ',';
    out += format_double(mu.weight(i));
    out += '\n';
  }
  return out;
}

DiscreteMeasure measure_from_csv(const std::string& text) {
  auto [cols, values] = table(text);
  if (cols.size() < 2 || cols.back() != "weight") throw ModelError("csv: expected columns x0..,weight");
  if (values.empty()) throw ModelError("csv: no atoms");
  const std::size_t d = cols.size() - 1;
  std::vector<double> flat, w;
  for (std::size_t r = 0; r < values.size() / cols.size(); ++r) {
    for (std::size_t a = 0; a < d; ++a) flat.push_back(values[r * cols.size() + a]);
    w.push_back(values[r * cols.size() + d]);
  }
  return {PointCloud(d, std::move(flat)), std::move(w)};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  const auto parent = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << content;
  if (!out) throw IoError("error writing '" + path + "'");
}

}  // namespace ifsm
