#include "ifsm/analysis.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "ifsm/error.hpp"
#include "ifsm/markov.hpp"
#include "ifsm/parallel.hpp"
#include "ifsm/rng.hpp"

namespace ifsm {

std::string_view to_string(Provenance p) { return p == Provenance::analytic ? "analytic" : "sampled lower bound"; }

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return "pass";
    case Verdict::fail:
      return "fail";
    case Verdict::estimate_only:
      return "estimate-only";
    case Verdict::not_applicable:
      return "not-applicable";
  }
  return "not-applicable";
}

Verdict HypothesisReport::verdict(std::string_view name) const {
  for (const auto& c : conditions)
    if (c.name == name) return c.verdict;
  throw DomainError("hypothesis report: no condition named '" + std::string(name) + "'");
}

double operator_norm(std::span<const double> a, std::size_t d, Metric m) {
  if (a.size() != d * d) throw DimensionMismatch("operator_norm: matrix is not D x D");
  if (m == Metric::max_coord) {
    double best = 0.0;
    for (std::size_t r = 0; r < d; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) s += std::abs(a[r * d + c]);
      best = std::max(best, s);
    }
    return best;
  }
  Eigen::MatrixXd mat(d, d);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) mat(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = a[r * d + c];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(mat);
  return svd.singularValues()(0);
}

namespace {

std::vector<double> matmul(const std::vector<double>& a, const std::vector<double>& b, std::size_t d) {
  std::vector<double> c(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k)
      for (std::size_t j = 0; j < d; ++j) c[i * d + j] += a[i * d + k] * b[k * d + j];
  return c;
}

std::vector<Point> probe_points(const IfsmModel& model, std::size_t grid_points, std::size_t samples,
                                std::uint64_t seed) {
  std::vector<Point> out;
  const PointCloud lattice = PointCloud::grid(model.domain(), grid_points);
  for (std::size_t i = 0; i < lattice.size(); ++i) out.emplace_back(lattice[i]);
  Rng rng(seed);
  for (std::size_t k = 0; k < samples; ++k) {
    std::vector<double> p(model.dim());
    for (std::size_t a = 0; a < model.dim(); ++a) p[a] = rng.uniform(model.domain().lo[a], model.domain().hi[a]);
    out.emplace_back(std::move(p));
  }
  return out;
}

// Neighbouring lattice pairs plus seeded random pairs of distinct probes.
std::vector<std::pair<std::size_t, std::size_t>> probe_pairs(const IfsmModel& model, std::size_t grid_points,
                                                             std::size_t n_probes, std::size_t random_pairs,
                                                             std::uint64_t seed) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  const std::size_t d = model.dim();
  std::size_t lattice = 1;
  for (std::size_t a = 0; a < d; ++a) lattice *= grid_points;
  std::vector<std::size_t> stride(d, 1);
  for (std::size_t a = d - 1; a-- > 0;) stride[a] = stride[a + 1] * grid_points;
  for (std::size_t i = 0; i < lattice; ++i)
    for (std::size_t a = 0; a < d; ++a)
      if ((i / stride[a]) % grid_points + 1 < grid_points) pairs.emplace_back(i, i + stride[a]);
  Rng rng(seed);
  for (std::size_t k = 0; k < random_pairs && n_probes > 1; ++k) {
    const std::size_t a = rng.below(n_probes);
    std::size_t b = rng.below(n_probes - 1);
    if (b >= a) ++b;
    pairs.emplace_back(a, b);
  }
  return pairs;
}

double sampled_t(const IfsmModel& model, const std::vector<Point>& probes,
                 const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  std::vector<std::vector<double>> q(probes.size());
  for (std::size_t i = 0; i < probes.size(); ++i) q[i] = model.weight_vector(probes[i]);
  const auto& atoms = model.params().atoms();
  std::vector<double> ratio(pairs.size(), 0.0);
  parallel_for(
      pairs.size(),
      [&](std::size_t lo, std::size_t hi) {
        for (std::size_t k = lo; k < hi; ++k) {
          const auto [a, b] = pairs[k];
          const double dx = distance(probes[a], probes[b], model.metric());
          if (dx == 0.0) continue;
          ratio[k] = wasserstein1_on(atoms, q[a], q[b], model.params().metric()) / dx;
        }
      },
      64);
  double best = 0.0;
  for (double r : ratio) best = std::max(best, r);
  return best;
}

// 1-Lipschitz test dictionary: coordinate projections and distances to
// sampled points. Negations give the same |f(a) - f(b)| and are implied.
struct TestFunctions {
  std::vector<Point> anchors;
  Metric metric;
  std::size_t dim;
  std::size_t size() const { return dim + anchors.size(); }
  double eval(std::size_t k, Coords x) const { return k < dim ? x[k] : distance(x, anchors[k - dim], metric); }
};

Condition make(std::string name, Verdict v, std::string note = {}) { return {std::move(name), v, std::move(note)}; }

}  // namespace

double min_atom_weight(const IfsmModel& model, std::size_t grid_points, std::size_t samples, std::uint64_t seed) {
  double best = 1.0;
  for (const auto& p : probe_points(model, grid_points, samples, seed))
    for (double w : model.weight_vector(p)) best = std::min(best, w);
  return best;
}

HypothesisReport check_hypotheses(const IfsmModel& model, const CheckOptions& opts) {
  HypothesisReport rep;
  rep.model = model.name();
  rep.M = model.depth();
  const std::size_t d = model.dim(), n = model.num_maps(), M = rep.M;
  const Metric metric = model.metric();
  const PointCloud lattice = PointCloud::grid(model.domain(), opts.grid_points);
  const std::vector<Point> probes = probe_points(model, opts.grid_points, opts.samples / 4, opts.seed);
  const auto pairs = probe_pairs(model, opts.grid_points, probes.size(), opts.samples, opts.seed + 1);
  const LipschitzOptions lip_opts{opts.samples, opts.seed + 2};

  // Sampled state-Lipschitz constants.
  double lip1_sampled = 0.0;
  for (std::size_t j = 0; j < n; ++j)
    lip1_sampled = std::max(
        lip1_sampled, estimate_lipschitz([&](Coords x) { return model.eval_map(j, x); }, lattice, metric, lip_opts));

  const double tuple_count = std::pow(static_cast<double>(n), static_cast<double>(M));
  auto tuple_of = [&](std::uint64_t code) {
    std::vector<std::uint32_t> t(M);
    for (std::size_t k = 0; k < M; ++k) {
      t[k] = static_cast<std::uint32_t>(code % n);
      code /= n;
    }
    return t;
  };
  double lipM_sampled = 0.0;
  {
    Rng rng(opts.seed + 3);
    const bool all = tuple_count <= 64.0;
    const std::size_t count = all ? static_cast<std::size_t>(tuple_count) : 64;
    for (std::size_t k = 0; k < count; ++k) {
      std::vector<std::uint32_t> t(M);
      if (all) {
        t = tuple_of(k);
      } else {
        for (auto& v : t) v = static_cast<std::uint32_t>(rng.below(n));
      }
      lipM_sampled = std::max(
          lipM_sampled, estimate_lipschitz([&](Coords x) { return model.compose_map(t, x); }, lattice, metric,
                                           {opts.samples / 4 + 1, opts.seed + 4 + k}));
    }
  }

  // Sampled parameter-Lipschitz constant r.
  double r_sampled = 0.0;
  {
    std::vector<double> a(d), b(d);
    for (const auto& x : probes)
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = i + 1; k < n; ++k) {
          model.apply(i, x, a);
          model.apply(k, x, b);
          r_sampled = std::max(r_sampled, distance(a, b, metric) / model.params().distance(i, k));
        }
  }

  rep.lip_one_step.sampled = lip1_sampled;
  rep.lip_M.sampled = lipM_sampled;
  rep.r.sampled = r_sampled;
  rep.lip_one_step.value = lip1_sampled;
  rep.lip_M.value = lipM_sampled;
  rep.r.value = r_sampled;

  if (const auto affine = model.as_affine()) {
    double lip1 = 0.0;
    for (const auto& a : affine->matrices) lip1 = std::max(lip1, operator_norm(a, d, metric));
    rep.lip_one_step = {lip1, Provenance::analytic, lip1_sampled};

    if (tuple_count <= static_cast<double>(opts.max_tuples)) {
      double lipM = 0.0;
      const auto count = static_cast<std::uint64_t>(tuple_count);
      for (std::uint64_t code = 0; code < count; ++code) {
        const auto t = tuple_of(code);
        std::vector<double> prod = affine->matrices[t[0]];
        for (std::size_t k = 1; k < M; ++k) prod = matmul(affine->matrices[t[k]], prod, d);
        lipM = std::max(lipM, operator_norm(prod, d, metric));
      }
      rep.lip_M = {lipM, Provenance::analytic, lipM_sampled};
    }

    // The difference of two affine maps is affine, so its norm is convex in x
    // and attains its maximum over the box at a corner.
    double r = 0.0;
    const auto corners = model.domain().corners();
    std::vector<double> diff(d);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = i + 1; k < n; ++k) {
        const double dl = model.params().distance(i, k);
        for (const auto& c : corners) {
          for (std::size_t row = 0; row < d; ++row) {
            double v = affine->offsets[i][row] - affine->offsets[k][row];
            for (std::size_t col = 0; col < d; ++col)
              v += (affine->matrices[i][row * d + col] - affine->matrices[k][row * d + col]) * c[col];
            diff[row] = v;
          }
          const std::vector<double> zero(d, 0.0);
          r = std::max(r, distance(diff, zero, metric) / dl);
        }
      }
    rep.r = {r, Provenance::analytic, r_sampled};
  }
  if (M == 1) rep.lip_M = rep.lip_one_step;

  // Weight-family constant t.
  const double t_sampled = sampled_t(model, probes, pairs);
  rep.t = {t_sampled, Provenance::sampled, t_sampled};
  const auto& atoms = model.params().atoms();
  const Metric pm = model.params().metric();
  if (std::holds_alternative<ConstantWeights>(model.weights())) {
    rep.t = {0.0, Provenance::analytic, t_sampled};
  } else if (const auto* mw = std::get_if<MixtureWeights>(&model.weights())) {
    const double dnu = wasserstein1_on(atoms, normalize_weights(mw->nu1), normalize_weights(mw->nu2), pm);
    if (mw->h_lipschitz) {
      rep.t = {*mw->h_lipschitz * dnu, Provenance::analytic, t_sampled};
    } else {
      const double lip_h = estimate_lipschitz(
          [&](Coords x) { return Point{mw->h.eval(x)}; }, lattice, metric, lip_opts);
      rep.t = {std::max(lip_h * dnu, t_sampled), Provenance::sampled, t_sampled};
    }
  } else if (const auto* tw = std::get_if<ThermodynamicWeights>(&model.weights())) {
    double zmin = std::numeric_limits<double>::infinity(), zmax = 0.0;
    for (const auto& p : probes) {
      const double z = model.partition_function(p);
      zmin = std::min(zmin, z);
      zmax = std::max(zmax, z);
    }
    rep.partition_min = zmin;
    rep.partition_max = zmax;
    if (tw->potential_lipschitz && tw->potential_sup) {
      // diam e^{|A|} Lip(A) s / inf Z. With Z == 1 this is the classical
      // constant; per-x normalization falls back to inf Z >= e^{-|A|} (Z taken
      // relative to the base mass).
      const double base_total = std::accumulate(tw->base.begin(), tw->base.end(), 0.0);
      const bool constant_z = zmax - zmin <= 1e-12 * zmax;
      const double z_lo = (constant_z ? zmin : std::exp(-*tw->potential_sup) * base_total) / base_total;
      const double bound = model.params().diameter() * std::exp(*tw->potential_sup) * *tw->potential_lipschitz *
                           rep.lip_one_step.value / z_lo;
      rep.t = {bound, rep.lip_one_step.provenance, t_sampled};
    }
  }

  // H4 surrogate.
  rep.h4_min_weight = 1.0;
  for (const auto& p : probes)
    for (double w : model.weight_vector(p)) rep.h4_min_weight = std::min(rep.h4_min_weight, w);

  // M1 / MP1 by sampling the 1-Lipschitz dictionary.
  TestFunctions dict{{}, metric, d};
  {
    Rng rng(opts.seed + 5);
    for (std::size_t k = 0; k < 8; ++k) {
      std::vector<double> p(d);
      for (std::size_t a = 0; a < d; ++a) p[a] = rng.uniform(model.domain().lo[a], model.domain().hi[a]);
      dict.anchors.emplace_back(std::move(p));
    }
  }
  const std::size_t m_pairs = std::min<std::size_t>(pairs.size(), 600);
  std::vector<double> m1(m_pairs, 0.0);
  std::vector<double> mp1(m_pairs, 0.0);
  const bool do_mp1 = M > 1 && tuple_count <= static_cast<double>(opts.max_tuples) / 10.0;
  // Spread the selection over lattice and random pairs.
  const std::size_t stride = std::max<std::size_t>(1, pairs.size() / std::max<std::size_t>(1, m_pairs));
  parallel_for(
      m_pairs,
      [&](std::size_t lo, std::size_t hi) {
        std::vector<double> q(n), a(d), b(d);
        for (std::size_t k = lo; k < hi; ++k) {
          const auto [ia, ib] = pairs[std::min(pairs.size() - 1, k * stride)];
          const Point& x = probes[ia];
          const Point& y = probes[ib];
          const double dxy = distance(x, y, metric);
          if (dxy == 0.0) continue;
          model.weights_into(x, q);
          std::vector<double> lhs(dict.size(), 0.0);
          for (std::size_t j = 0; j < n; ++j) {
            model.apply(j, x, a);
            model.apply(j, y, b);
            for (std::size_t f = 0; f < dict.size(); ++f) lhs[f] += q[j] * std::abs(dict.eval(f, a) - dict.eval(f, b));
          }
          m1[k] = *std::max_element(lhs.begin(), lhs.end()) / dxy;
          if (do_mp1) {
            const ComposedMeasure cm = model.composed_measure(M, x);
            std::fill(lhs.begin(), lhs.end(), 0.0);
            for (std::size_t t = 0; t < cm.size(); ++t) {
              const Point px = model.compose_map(cm.tuple(t), x);
              const Point py = model.compose_map(cm.tuple(t), y);
              for (std::size_t f = 0; f < dict.size(); ++f)
                lhs[f] += cm.weights[t] * std::abs(dict.eval(f, px) - dict.eval(f, py));
            }
            mp1[k] = *std::max_element(lhs.begin(), lhs.end()) / dxy;
          }
        }
      },
      16);
  rep.m1_estimate = m_pairs ? *std::max_element(m1.begin(), m1.end()) : 0.0;
  if (M == 1) {
    rep.mp1_estimate = rep.m1_estimate;
  } else if (do_mp1) {
    rep.mp1_estimate = *std::max_element(mp1.begin(), mp1.end());
  }

  // Verdicts.
  const double sl = rep.slack;
  auto lipschitz_verdict = [&](const Constant& c, double limit, bool strict) {
    const bool ok = strict ? c.value < limit : c.value <= limit + sl;
    if (c.provenance == Provenance::analytic) return ok ? Verdict::pass : Verdict::fail;
    return ok ? Verdict::estimate_only : Verdict::fail;
  };
  const Verdict c1 = lipschitz_verdict(rep.lip_one_step, 1.0, true);
  const Verdict w1 = lipschitz_verdict(rep.lip_one_step, 1.0, false);
  const Verdict cp1 = lipschitz_verdict(rep.lip_M, 1.0, true);
  rep.conditions.push_back(make("C1", c1, "sup_j Lip(tau_j) < 1"));
  rep.conditions.push_back(make("W1", w1, "sup_j Lip(tau_j) <= 1"));
  rep.conditions.push_back(make("H2", rep.r.provenance == Provenance::analytic ? Verdict::pass : Verdict::estimate_only,
                                "lambda -> tau(lambda, x) is r-Lipschitz uniformly in x"));
  Verdict h3 = rep.t.provenance == Provenance::analytic ? Verdict::pass : Verdict::estimate_only;
  std::string h3_note = "x -> q_x is t-Lipschitz into (P(Lambda), W1)";
  if (rep.t.sampled > rep.t.value + sl) {
    h3 = Verdict::fail;
    h3_note += "; sampled ratio exceeds the stated t";
  }
  rep.conditions.push_back(make("H3", h3, h3_note));
  rep.conditions.push_back(make("H4", rep.h4_min_weight > 0.0 ? Verdict::pass : Verdict::fail,
                                "atom-level surrogate: every atom has positive weight at every sampled x"));

  rep.s = rep.lip_one_step.value;
  rep.s_source = "C1";
  if (c1 == Verdict::fail && cp1 != Verdict::fail) {
    rep.s = rep.lip_M.value;
    rep.s_source = "CP1";
  }
  const std::string strict_note = "sampled check of <= with slack; the strict inequality is not machine-checkable";
  Verdict m1v = Verdict::estimate_only;
  if (c1 != Verdict::fail) {
    if (rep.m1_estimate > rep.lip_one_step.value + sl) {
      m1v = Verdict::fail;
    } else if (c1 == Verdict::pass) {
      m1v = Verdict::pass;
    }
  }
  rep.conditions.push_back(make("M1", m1v, strict_note));
  rep.conditions.push_back(make("CP1", cp1, "sup over M-tuples of Lip(tau_{lambda^M}) < 1"));
  Verdict mp1v = Verdict::not_applicable;
  if (rep.mp1_estimate) {
    mp1v = Verdict::estimate_only;
    if (cp1 != Verdict::fail) {
      if (*rep.mp1_estimate > rep.lip_M.value + sl) {
        mp1v = Verdict::fail;
      } else if (cp1 == Verdict::pass) {
        mp1v = Verdict::pass;
      }
    }
  }
  rep.conditions.push_back(make("MP1", mp1v, strict_note));

  rep.budget1 = rep.s + rep.r.value * rep.t.value;
  rep.budget2 = rep.s + rep.r.value * static_cast<double>(M) * rep.t.value;
  const bool all_analytic = rep.r.provenance == Provenance::analytic && rep.t.provenance == Provenance::analytic &&
                            (rep.s_source == "C1" ? rep.lip_one_step : rep.lip_M).provenance == Provenance::analytic;
  auto budget_verdict = [&](double b) {
    if (!(b < 1.0)) return Verdict::fail;
    return all_analytic ? Verdict::pass : Verdict::estimate_only;
  };
  if (rep.s_source == "C1") {
    rep.conditions.push_back(make("budget1", budget_verdict(rep.budget1), "s + r t < 1"));
  } else {
    rep.conditions.push_back(make("budget1", Verdict::not_applicable, "C1 fails; the M-step budget applies"));
  }
  rep.conditions.push_back(make("budget2", budget_verdict(rep.budget2), "s + r M t < 1"));
  return rep;
}

SupportReport support_equals_attractor(const IfsmModel& model, const DiscreteMeasure& invariant,
                                       const PointCloud& attractor, double weight_floor, double tol) {
  SupportReport rep;
  const PointCloud supp = support(invariant, weight_floor);
  rep.support_size = supp.size();
  rep.attractor_size = attractor.size();
  rep.distance = hausdorff(supp, attractor, model.metric());
  rep.tol = tol;
  rep.holds = rep.distance <= tol;
  rep.h4_min_weight = min_atom_weight(model);
  rep.h4 = rep.h4_min_weight > 0.0 ? Verdict::pass : Verdict::fail;
  return rep;
}

StabilityReport stability_experiment(const std::vector<IfsmModel>& models, const IfsmModel& target,
                                     const StabilityOptions& opts) {
  if (models.empty()) throw DomainError("stability: no models given");
  const std::size_t d = target.dim(), n = target.num_maps();

  std::vector<Point> probes;
  {
    const CellGrid grid(target.domain(), std::max<std::size_t>(1, opts.resolution));
    const double cells = std::pow(static_cast<double>(grid.resolution()), static_cast<double>(d));
    if (opts.resolution > 0 && cells <= static_cast<double>(opts.max_grid_points)) {
      std::vector<double> c(d);
      for (std::uint64_t k = 0; k < static_cast<std::uint64_t>(cells); ++k) {
        grid.center_of_key(k, c);
        probes.emplace_back(c);
      }
    } else {
      const auto per_axis = static_cast<std::size_t>(
          std::floor(std::pow(static_cast<double>(opts.max_grid_points), 1.0 / static_cast<double>(d))));
      const PointCloud lattice = PointCloud::grid(target.domain(), std::max<std::size_t>(2, per_axis));
      for (std::size_t i = 0; i < lattice.size(); ++i) probes.emplace_back(lattice[i]);
    }
    Rng rng(opts.seed);
    for (std::size_t k = 0; k < opts.random_points; ++k) {
      std::vector<double> p(d);
      for (std::size_t a = 0; a < d; ++a) p[a] = rng.uniform(target.domain().lo[a], target.domain().hi[a]);
      probes.emplace_back(std::move(p));
    }
  }

  for (const auto& m : models) {
    if (m.dim() != d || m.num_maps() != n || m.params().atoms().flat() != target.params().atoms().flat() ||
        m.params().metric() != target.params().metric() || m.metric() != target.metric() ||
        !(m.domain() == target.domain()))
      throw ModelError("stability: model '" + m.name() + "' does not share the parameter space of the target");
    for (const auto& p : probes)
      for (std::size_t j = 0; j < n; ++j)
        if (!(m.eval_map(j, p) == target.eval_map(j, p)))
          throw ModelError("stability: model '" + m.name() + "' does not share the map family of the target");
  }

  StabilityReport rep;
  std::vector<HypothesisReport> checks;
  for (const auto& m : models) checks.push_back(check_hypotheses(m, opts.check));
  checks.push_back(check_hypotheses(target, opts.check));
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const auto& c = checks[i];
    if (!(c.budget1 < 1.0))
      throw ModelError("stability: budget violation in model '" + c.model + "': s + r t = " +
                       std::to_string(c.budget1));
    rep.s = std::max(rep.s, c.s);
    rep.r = std::max(rep.r, c.r.value);
    rep.t = std::max(rep.t, c.t.value);
  }
  const double c = rep.s + rep.r * rep.t;
  if (!(c < 1.0)) throw ModelError("stability: combined budget s + r t = " + std::to_string(c) + " is not below 1");
  rep.coefficient = rep.r / (1.0 - c);
  const double cell =
      opts.resolution > 0 ? CellGrid(target.domain(), opts.resolution).cell_diameter(target.metric()) : 0.0;
  rep.slack = 2.0 * cell + opts.tol;

  InvariantOptions io{opts.resolution, opts.tol, 1000, checks.back().budget1};
  const InvariantResult star = invariant_measure(target, std::nullopt, io);
  rep.target_converged = star.log.converged;

  rep.rows.resize(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) {
    const IfsmModel& m = models[i];
    StabilityRow& row = rep.rows[i];
    row.index = i;
    std::vector<double> eps(probes.size());
    parallel_for(
        probes.size(),
        [&](std::size_t lo, std::size_t hi) {
          for (std::size_t k = lo; k < hi; ++k)
            eps[k] = wasserstein1_on(target.params().atoms(), m.weight_vector(probes[k]),
                                     target.weight_vector(probes[k]), target.params().metric());
        },
        64);
    row.eps = *std::max_element(eps.begin(), eps.end());
    InvariantOptions mo = io;
    mo.contraction = checks[i].budget1;
    const InvariantResult mu = invariant_measure(m, std::nullopt, mo);
    row.converged = mu.log.converged;
    row.distance = wasserstein1(mu.measure, star.measure, target.metric());
    row.bound = rep.coefficient * row.eps;
    row.holds = row.distance <= row.bound + rep.slack;
  }
  rep.all_hold = std::all_of(rep.rows.begin(), rep.rows.end(), [](const StabilityRow& r) { return r.holds; });
  rep.monotone = true;
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    if (rep.rows[i].distance > rep.rows[i - 1].distance + rep.slack) rep.monotone = false;
  return rep;
}

}  // namespace ifsm
