#include "ifsm/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ifsm/error.hpp"
#include "ifsm/rng.hpp"

namespace ifsm {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// ---------------------------------------------------------------------------
// ParamSpace

ParamSpace::ParamSpace(PointCloud atoms, Metric metric) : atoms_(std::move(atoms)), metric_(metric) {
  for (std::size_t a = 0; a < atoms_.size(); ++a) {
    for (std::size_t b = a + 1; b < atoms_.size(); ++b) {
      const double d = ifsm::distance(atoms_[a], atoms_[b], metric_);
      if (d == 0.0) throw ModelError("parameter atoms " + std::to_string(a) + " and " + std::to_string(b) + " coincide");
      diameter_ = std::max(diameter_, d);
    }
  }
}

ParamSpace ParamSpace::from_interval(Box box, std::size_t grid, Metric metric) {
  if (grid == 0) throw ModelError("parameter interval: grid must be >= 1");
  ParamSpace space(PointCloud::grid(box, grid), metric);
  space.interval_ = Interval{std::move(box), grid};
  return space;
}

double ParamSpace::distance(std::size_t a, std::size_t b) const { return ifsm::distance(atoms_[a], atoms_[b], metric_); }

// ---------------------------------------------------------------------------
// IfsmModel

namespace {
void check_probability_vector(const std::vector<double>& v, std::size_t n, const std::string& what) {
  if (v.size() != n) throw ModelError(what + ": expected " + std::to_string(n) + " weights, got " + std::to_string(v.size()));
  double total = 0.0;
  for (double w : v) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ModelError(what + ": weights must be finite and nonnegative");
    total += w;
  }
  if (!(total > 0.0)) throw ModelError(what + ": total weight must be positive");
}

// In-place normalization with the last positive entry absorbing rounding.
void normalize_in_place(std::span<double> w) {
  double total = 0.0;
  for (double v : w) total += v;
  if (!(total > 0.0) || !std::isfinite(total)) throw DomainError("weights: all weights vanish at this point");
  std::size_t last = w.size() - 1;
  while (last > 0 && w[last] == 0.0) --last;
  double running = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (j == last) continue;
    w[j] /= total;
    running += w[j];
  }
  w[last] = std::max(0.0, 1.0 - running);
}
}  // namespace

IfsmModel::IfsmModel(std::string name, Box domain, Metric metric, ParamSpace params, MapFamily maps,
                     WeightFamily weights, bool full_support, std::size_t depth)
    : name_(std::move(name)),
      domain_(std::move(domain)),
      metric_(metric),
      params_(std::move(params)),
      maps_(std::move(maps)),
      weights_(std::move(weights)),
      full_support_(full_support),
      depth_(depth) {
  const std::size_t n = params_.size();
  const std::size_t d = dim();
  if (depth_ == 0) throw ModelError("model: depth must be >= 1");

  std::visit(Overloaded{
                 [&](const AffineMaps& m) {
                   if (m.matrices.size() != n || m.offsets.size() != n)
                     throw ModelError("affine maps: need one matrix and offset per parameter atom");
                   for (std::size_t j = 0; j < n; ++j) {
                     if (m.matrices[j].size() != d * d || m.offsets[j].size() != d)
                       throw ModelError("affine maps: atom " + std::to_string(j) + " has wrong coefficient shape");
                     for (double v : m.matrices[j])
                       if (!std::isfinite(v)) throw ModelError("affine maps: non-finite coefficient");
                     for (double v : m.offsets[j])
                       if (!std::isfinite(v)) throw ModelError("affine maps: non-finite offset");
                   }
                 },
                 [&](const GifsSkewMaps& m) {
                   if (m.degree < 2) throw ModelError("gifs_skew: degree must be >= 2");
                   if (d != m.degree) throw ModelError("gifs_skew: state dimension must equal the degree");
                   if (metric_ != Metric::max_coord) throw ModelError("gifs_skew: state metric must be max_coord");
                   if (m.coefficients.size() != n || m.offsets.size() != n)
                     throw ModelError("gifs_skew: need coefficients and offset per parameter atom");
                   double sup_b = 0.0;
                   for (const auto& a : m.coefficients) {
                     if (a.size() != m.degree) throw ModelError("gifs_skew: coefficient vector length must equal degree");
                     double b = 0.0;
                     for (double v : a) {
                       if (!std::isfinite(v)) throw ModelError("gifs_skew: non-finite coefficient");
                       b += std::abs(v);
                     }
                     sup_b = std::max(sup_b, b);
                   }
                   if (!(sup_b < 1.0))
                     throw ModelError("gifs_skew: sup of coefficient sums b_lambda is " + std::to_string(sup_b) +
                                      ", must be < 1");
                 },
                 [&](const CustomMaps& m) {
                   if (m.expressions.size() != d) throw ModelError("custom maps: need one expression per coordinate");
                   for (const auto& e : m.expressions)
                     if (e.state_arity() > d || e.param_arity() > params_.dim())
                       throw ModelError("custom maps: expression '" + e.source() + "' references unknown variables");
                 },
             },
             maps_);

  std::visit(Overloaded{
                 [&](const ConstantWeights& w) { check_probability_vector(w.p, n, "constant weights"); },
                 [&](const ThermodynamicWeights& w) {
                   check_probability_vector(w.base, n, "thermodynamic base weights");
                   if (w.potential.state_arity() > d || w.potential.param_arity() > 0)
                     throw ModelError("thermodynamic potential must depend on state variables only");
                 },
                 [&](const MixtureWeights& w) {
                   check_probability_vector(w.nu1, n, "mixture nu1");
                   check_probability_vector(w.nu2, n, "mixture nu2");
                   if (w.h.state_arity() > d || w.h.param_arity() > 0)
                     throw ModelError("mixture h must depend on state variables only");
                 },
                 [&](const CustomWeights& w) {
                   if (w.w.state_arity() > d || w.w.param_arity() > params_.dim())
                     throw ModelError("custom weights: expression references unknown variables");
                 },
             },
             weights_);
  validate();
}

void IfsmModel::apply_raw(std::size_t j, Coords x, std::span<double> out) const {
  const std::size_t d = dim();
  std::visit(Overloaded{
                 [&](const AffineMaps& m) {
                   const auto& a = m.matrices[j];
                   const auto& b = m.offsets[j];
                   for (std::size_t r = 0; r < d; ++r) {
                     double s = b[r];
                     for (std::size_t c = 0; c < d; ++c) s += a[r * d + c] * x[c];
                     out[r] = s;
                   }
                 },
                 [&](const GifsSkewMaps& m) {
                   const auto& a = m.coefficients[j];
                   double phi = m.offsets[j];
                   for (std::size_t i = 0; i < d; ++i) phi += a[i] * x[i];
                   for (std::size_t i = 0; i + 1 < d; ++i) out[i] = x[i + 1];
                   out[d - 1] = phi;
                 },
                 [&](const CustomMaps& m) {
                   const auto lambda = params_.atom(j);
                   for (std::size_t i = 0; i < d; ++i) out[i] = m.expressions[i].eval(x, lambda);
                 },
             },
             maps_);
}

void IfsmModel::apply(std::size_t j, Coords x, std::span<double> out) const {
  if (j >= num_maps()) throw DomainError("map index " + std::to_string(j) + " out of range");
  if (x.size() != dim() || out.size() != dim()) throw DimensionMismatch("apply: point dimension mismatch");
  apply_raw(j, x, out);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double lo = domain_.lo[i], hi = domain_.hi[i];
    if (!(out[i] >= lo - kEscapeTolerance && out[i] <= hi + kEscapeTolerance))
      throw ModelError("model '" + name_ + "': map " + std::to_string(j) + " sends a point outside the domain (coordinate " +
                       std::to_string(i) + " = " + std::to_string(out[i]) + ")");
    out[i] = std::clamp(out[i], lo, hi);
  }
}

Point IfsmModel::eval_map(std::size_t j, Coords x) const {
  std::vector<double> out(dim());
  apply(j, x, out);
  return Point(std::move(out));
}

Point IfsmModel::compose_map(std::span<const std::uint32_t> tuple, Coords x) const {
  std::vector<double> cur(x.begin(), x.end()), next(dim());
  for (const auto j : tuple) {
    apply(j, cur, next);
    cur.swap(next);
  }
  return Point(std::move(cur));
}

void IfsmModel::weights_into(Coords x, std::span<double> out) const {
  const std::size_t n = num_maps();
  if (out.size() != n) throw DimensionMismatch("weights_into: output size must equal the number of maps");
  if (x.size() != dim()) throw DimensionMismatch("weights_into: point dimension mismatch");
  std::visit(Overloaded{
                 [&](const ConstantWeights& w) { std::copy(w.p.begin(), w.p.end(), out.begin()); },
                 [&](const ThermodynamicWeights& w) {
                   std::vector<double> img(dim());
                   for (std::size_t j = 0; j < n; ++j) {
                     apply(j, x, img);
                     out[j] = std::exp(w.potential.eval(img)) * w.base[j];
                   }
                 },
                 [&](const MixtureWeights& w) {
                   double h = w.h.eval(x);
                   if (!(h >= -1e-12 && h <= 1.0 + 1e-12))
                     throw ModelError("mixture: h(x) = " + std::to_string(h) + " outside [0, 1]");
                   h = std::clamp(h, 0.0, 1.0);
                   for (std::size_t j = 0; j < n; ++j) out[j] = (1.0 - h) * w.nu1[j] + h * w.nu2[j];
                 },
                 [&](const CustomWeights& w) {
                   for (std::size_t j = 0; j < n; ++j) {
                     const double v = w.w.eval(x, params_.atom(j));
                     if (!(v >= 0.0) || !std::isfinite(v))
                       throw ModelError("custom weights: w(x, lambda_" + std::to_string(j) + ") is negative or non-finite");
                     out[j] = v;
                   }
                 },
             },
             weights_);
  normalize_in_place(out);
}

std::vector<double> IfsmModel::weight_vector(Coords x) const {
  std::vector<double> w(num_maps());
  weights_into(x, w);
  return w;
}

DiscreteMeasure IfsmModel::weights_at(Coords x) const { return {params_.atoms(), weight_vector(x)}; }

double IfsmModel::partition_function(Coords x) const {
  const auto* w = std::get_if<ThermodynamicWeights>(&weights_);
  if (!w) throw DomainError("partition_function: model weights are not thermodynamic");
  std::vector<double> img(dim());
  double z = 0.0;
  for (std::size_t j = 0; j < num_maps(); ++j) {
    apply(j, x, img);
    z += std::exp(w->potential.eval(img)) * w->base[j];
  }
  return z;
}

ComposedMeasure IfsmModel::composed_measure(std::size_t depth, Coords x, const ComposeOptions& opts) const {
  if (depth == 0) throw DomainError("composed_measure: depth must be >= 1");
  const std::size_t n = num_maps();
  if (opts.prune_floor <= 0.0) {
    const double count = std::pow(static_cast<double>(n), static_cast<double>(depth));
    if (count > static_cast<double>(opts.max_tuples))
      throw CapacityExceeded("composed_measure: " + std::to_string(n) + "^" + std::to_string(depth) +
                             " tuples exceed the cap; set a prune floor");
  }
  ComposedMeasure out;
  out.depth = depth;
  out.base = Point(x);

  struct Frame {
    std::vector<double> point;
    std::vector<double> q;
    double weight;
    std::size_t next;  // next child index
  };
  std::vector<Frame> stack;
  std::vector<std::uint32_t> prefix;
  stack.push_back({std::vector<double>(x.begin(), x.end()), weight_vector(x), 1.0, 0});
  while (!stack.empty()) {
    Frame& top = stack.back();
    if (top.next == n) {
      stack.pop_back();
      if (!prefix.empty()) prefix.pop_back();
      continue;
    }
    const std::size_t j = top.next++;
    const double w = top.weight * top.q[j];
    if (w == 0.0) continue;
    if (w < opts.prune_floor) {
      out.discarded_mass += w;
      continue;
    }
    if (stack.size() == depth) {
      out.indices.insert(out.indices.end(), prefix.begin(), prefix.end());
      out.indices.push_back(static_cast<std::uint32_t>(j));
      out.weights.push_back(w);
      if (out.weights.size() > opts.max_tuples) throw CapacityExceeded("composed_measure: tuple cap exceeded");
      continue;
    }
    std::vector<double> img(dim());
    apply(j, top.point, img);
    std::vector<double> q = weight_vector(img);
    prefix.push_back(static_cast<std::uint32_t>(j));
    stack.push_back({std::move(img), std::move(q), w, 0});
  }
  if (out.weights.empty()) throw DomainError("composed_measure: every tuple was pruned");
  if (out.discarded_mass > 0.0) {
    out.weights = normalize_weights(std::move(out.weights));
    out.renormalized = true;
  }
  return out;
}

std::optional<AffineMaps> IfsmModel::as_affine() const {
  if (const auto* a = std::get_if<AffineMaps>(&maps_)) return *a;
  if (const auto* g = std::get_if<GifsSkewMaps>(&maps_)) {
    const std::size_t m = g->degree;
    AffineMaps out;
    for (std::size_t j = 0; j < num_maps(); ++j) {
      std::vector<double> a(m * m, 0.0), b(m, 0.0);
      for (std::size_t r = 0; r + 1 < m; ++r) a[r * m + r + 1] = 1.0;
      for (std::size_t c = 0; c < m; ++c) a[(m - 1) * m + c] = g->coefficients[j][c];
      b[m - 1] = g->offsets[j];
      out.matrices.push_back(std::move(a));
      out.offsets.push_back(std::move(b));
    }
    return out;
  }
  return std::nullopt;
}

void IfsmModel::validate(std::size_t samples, std::uint64_t seed) const {
  std::vector<Point> probes = domain_.corners();
  Rng rng(seed);
  for (std::size_t k = 0; k < samples; ++k) {
    std::vector<double> p(dim());
    for (std::size_t i = 0; i < dim(); ++i) p[i] = rng.uniform(domain_.lo[i], domain_.hi[i]);
    probes.emplace_back(std::move(p));
  }
  std::vector<double> img(dim()), w(num_maps());
  for (const auto& p : probes) {
    for (std::size_t j = 0; j < num_maps(); ++j) apply(j, p, img);
    try {
      weights_into(p, w);
    } catch (const DomainError& e) {
      throw ModelError("model '" + name_ + "': " + e.what());
    }
    if (full_support_) {
      for (std::size_t j = 0; j < num_maps(); ++j)
        if (!(w[j] > 0.0))
          throw ModelError("model '" + name_ + "' declares full support but atom " + std::to_string(j) +
                           " gets zero weight");
    }
  }
}

}  // namespace ifsm
