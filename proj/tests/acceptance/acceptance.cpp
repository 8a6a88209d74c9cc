// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "ifsm/analysis.hpp"
#include "ifsm/builtin_models.hpp"
#include "ifsm/hutchinson.hpp"
#include "ifsm/markov.hpp"
#include "ifsm/measure.hpp"
#include "ifsm/process.hpp"
#include "oracles.hpp"

using namespace ifsm;

namespace {

// Tolerances.
constexpr double kRound = 1e-12;        // floating-point allowance on exact inequalities
constexpr double kFlowVsVertex = 1e-6;  // criterion 9, small supports
constexpr double kFlowVsCdf = 1e-9;     // criterion 9, line
constexpr double kCantorW1 = 0.01;      // criterion 5
constexpr double kSigmas = 4.0;         // criterion 10

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double snap_of(const IfsmModel& m, std::size_t res) { return CellGrid(m.domain(), res).snap_error(m.metric()); }
double cell_of(const IfsmModel& m, std::size_t res) { return CellGrid(m.domain(), res).cell_diameter(m.metric()); }

Outcome hutchinson_contraction() {
  Rng rng(1001);
  bool ok = true;
  double worst = 0.0;  // largest after / (s before + 2 snap)
  for (const auto& [name, s, res] : {std::tuple{"cantor", 1.0 / 3.0, std::size_t{729}},
                                     std::tuple{"sierpinski", 0.5, std::size_t{512}}}) {
    const IfsmModel m = models::by_name(name);
    const double snap = snap_of(m, res);
    for (int k = 0; k < 100; ++k) {
      const PointCloud b = testing::random_cloud(rng, m.domain(), 1 + rng.below(200));
      const PointCloud c = testing::random_cloud(rng, m.domain(), 1 + rng.below(200));
      const double before = hausdorff(b, c, m.metric());
      const double after = hausdorff(fractal_step(m, b, res), fractal_step(m, c, res), m.metric());
      const double bound = s * before + 2.0 * snap;
      ok = ok && after <= bound + kRound;
      worst = std::max(worst, after / bound);
    }
  }
  return {ok, "200 pairs, max h(F B, F C) / (s h(B, C) + 2 snap) = " + fmt("%.4f", worst)};
}

Outcome attractor_oracle() {
  const IfsmModel c = models::cantor();
  const std::size_t cres = 59049;  // 3^10
  const AttractorResult a = attractor(c, PointCloud(c.domain().corners()), {cres});
  const double cd = hausdorff(a.cloud, PointCloud(1, oracle::cantor_endpoints(8)), c.metric());
  const double cb = std::pow(3.0, -8) + 2.0 * snap_of(c, cres);

  const IfsmModel s = models::sierpinski();
  const std::size_t sres = 1024;
  const AttractorResult g = attractor(s, PointCloud(s.domain().corners()), {sres});
  const double sd = hausdorff(g.cloud, testing::from_points(oracle::sierpinski_vertices(8)), s.metric());
  const double sb = std::ldexp(1.0, -8) + 2.0 * snap_of(s, sres);

  const bool ok = a.log.converged && g.log.converged && cd <= cb && sd <= sb;
  return {ok, "cantor h = " + fmt("%.3e", cd) + " <= " + fmt("%.3e", cb) + ", sierpinski h = " + fmt("%.3e", sd) +
                  " <= " + fmt("%.3e", sb)};
}

Outcome collage_bound() {
  const IfsmModel c = models::cantor();
  const std::size_t res = 729;
  const AttractorResult a = attractor(c, PointCloud(c.domain().corners()), {res});
  const double slack = 2.0 * cell_of(c, res) + a.tol;
  Rng rng(1003);
  bool ok = a.log.converged;
  double margin = 1e300;
  for (int k = 0; k < 20; ++k) {
    const PointCloud b = testing::random_cloud(rng, c.domain(), 1 + rng.below(100));
    const double step = hausdorff(fractal_step(c, b, 0), b, c.metric());
    const double measured = hausdorff(b, a.cloud, c.metric());
    const double bound = step / (1.0 - 1.0 / 3.0) + slack;
    ok = ok && measured <= bound;
    margin = std::min(margin, bound - measured);
  }
  return {ok, "20 clouds, min bound - h(B, A) = " + fmt("%.4f", margin)};
}

Outcome markov_contraction() {
  const IfsmModel m = models::mixture();
  const HypothesisReport rep = check_hypotheses(m);
  const double c = rep.budget1;
  const std::size_t res = 729;
  const double slack = 2.0 * snap_of(m, res);
  Rng rng(1004);
  bool ok = rep.verdict("budget1") == Verdict::pass && c < 1.0;
  double worst_exact = 0.0, worst_binned = 0.0;
  for (int k = 0; k < 50; ++k) {
    const DiscreteMeasure mu = testing::random_measure(rng, m.domain(), 2 + rng.below(40));
    const DiscreteMeasure nu = testing::random_measure(rng, m.domain(), 2 + rng.below(40));
    const double before = wasserstein1(mu, nu, m.metric());
    const double exact = wasserstein1(markov_push(m, mu, 0), markov_push(m, nu, 0), m.metric());
    const double binned = wasserstein1(markov_push(m, mu, res), markov_push(m, nu, res), m.metric());
    ok = ok && exact <= c * before + kRound && binned <= c * before + slack + kRound;
    worst_exact = std::max(worst_exact, exact / before);
    worst_binned = std::max(worst_binned, (binned - slack) / before);
  }
  return {ok, "s + r t = " + fmt("%.4f", c) + " (" + std::string(to_string(rep.t.provenance)) +
                  "), max exact ratio " + fmt("%.4f", worst_exact) + ", max binned (minus slack) " +
                  fmt("%.4f", worst_binned)};
}

Outcome invariant_oracle() {
  const IfsmModel c = models::cantor();
  const std::size_t res = 729;
  const double cell = cell_of(c, res);
  const InvariantResult inv = invariant_measure(c, std::nullopt, {res, 1e-6, 500, 1.0 / 3.0});
  const double f13 = cdf(inv.measure, 1.0 / 3.0);
  const double f23 = cdf(inv.measure, 2.0 / 3.0 - 2.0 * cell);  // left limit at 2/3 on the grid
  const double w = oracle::w1_line(testing::to_line(inv.measure), oracle::cantor_measure(10));
  const bool ok = inv.log.converged && std::abs(f13 - 0.5) <= 2.0 * cell && std::abs(f23 - 0.5) <= 2.0 * cell &&
                  w <= kCantorW1;
  return {ok, "F(1/3) = " + fmt("%.6f", f13) + ", F(2/3-) = " + fmt("%.6f", f23) + ", W1 to depth 10 = " +
                  fmt("%.3e", w)};
}

Outcome m_step_contraction() {
  const IfsmModel g = models::gifs_skew();
  const HypothesisReport rep = check_hypotheses(g);
  const double c = rep.budget2;
  const std::size_t depth = rep.M;
  Rng rng(1006);
  bool ok = rep.s_source == "CP1" && c < 1.0;
  double worst_one = 0.0, worst_m = 0.0;
  for (int k = 0; k < 20; ++k) {
    const DiscreteMeasure mu = testing::random_measure(rng, g.domain(), 20 + rng.below(11));
    const DiscreteMeasure nu = testing::random_measure(rng, g.domain(), 20 + rng.below(11));
    const double before = wasserstein1(mu, nu, g.metric());
    const double one = wasserstein1(markov_push(g, mu, 0), markov_push(g, nu, 0), g.metric());
    const double after = wasserstein1(markov_push_M(g, mu, depth, 0), markov_push_M(g, nu, depth, 0), g.metric());
    ok = ok && after <= c * before + kRound;
    worst_one = std::max(worst_one, one / before);
    worst_m = std::max(worst_m, after / before);
  }
  // Measures that differ only in the carried coordinate are not contracted in one step.
  const DiscreteMeasure p = DiscreteMeasure::dirac(Point{0.5, 0.1});
  const DiscreteMeasure q = DiscreteMeasure::dirac(Point{0.5, 0.2});
  const double shift = wasserstein1(markov_push(g, p, 0), markov_push(g, q, 0), g.metric()) / 0.1;
  return {ok, "M = " + std::to_string(depth) + ", s + r M t = " + fmt("%.4f", c) + ", max M-step ratio " +
                  fmt("%.4f", worst_m) + ", max one-step ratio " + fmt("%.4f", worst_one) + " (shifted pair " +
                  fmt("%.4f", shift) + ")"};
}

Outcome support_equals() {
  const std::size_t res = 729;
  bool ok = true;
  std::string detail;
  for (const char* name : {"cantor", "mixture", "h4_violating"}) {
    const IfsmModel m = models::by_name(name);
    const double cell = cell_of(m, res);
    const InvariantResult inv = invariant_measure(m, std::nullopt, {res, 1e-9, 500});
    const AttractorResult a = attractor(m, PointCloud(m.domain().corners()), {res});
    const SupportReport r = support_equals_attractor(m, inv.measure, a.cloud, 1e-12, 2.0 * cell);
    const bool expect_hold = std::string(name) != "h4_violating";
    if (expect_hold) {
      ok = ok && r.holds && r.h4 == Verdict::pass && inv.log.converged;
    } else {
      ok = ok && !r.holds && r.h4 == Verdict::fail;
    }
    detail += std::string(detail.empty() ? "" : ", ") + name + " h = " + fmt("%.2e", r.distance) + " (H4 " +
              std::string(to_string(r.h4)) + ")";
  }
  return {ok, detail};
}

Outcome stability() {
  std::vector<IfsmModel> family;
  for (double n : {1.0, 2.0, 4.0, 8.0, 16.0}) family.push_back(models::mixture(1.0 / n));
  const StabilityReport rep = stability_experiment(family, models::mixture(0.0));
  bool ok = rep.all_hold && rep.monotone && rep.target_converged;
  std::ostringstream d;
  d << "coefficient " << fmt("%.3f", rep.coefficient) << "; d/bound:";
  for (const auto& r : rep.rows) {
    ok = ok && r.converged;
    d << " " << fmt("%.4f", r.distance) << "/" << fmt("%.4f", r.bound);
  }
  return {ok, d.str()};
}

Outcome wasserstein_oracle() {
  Rng rng(1009);
  double worst_vertex = 0.0, worst_cdf = 0.0;
  for (int k = 0; k < 200; ++k) {
    const std::size_t d = 1 + rng.below(3);
    const Metric metric = rng.below(2) ? Metric::euclidean : Metric::max_coord;
    const DiscreteMeasure mu = testing::random_measure(rng, Box::unit(d), 1 + rng.below(4));
    const DiscreteMeasure nu = testing::random_measure(rng, Box::unit(d), 1 + rng.below(4));
    const auto a = testing::to_points(mu.atoms()), b = testing::to_points(nu.atoms());
    std::vector<double> cost;
    for (const auto& p : a)
      for (const auto& q : b) cost.push_back(metric == Metric::euclidean ? oracle::euclid(p, q) : oracle::maxc(p, q));
    const double want = oracle::transport_by_vertices(mu.weights(), nu.weights(), cost);
    worst_vertex = std::max(worst_vertex, std::abs(wasserstein1_flow(mu, nu, metric) - want));
  }
  for (int k = 0; k < 200; ++k) {
    const DiscreteMeasure mu = testing::random_measure(rng, Box::unit(1), 1 + rng.below(60));
    const DiscreteMeasure nu = testing::random_measure(rng, Box::unit(1), 1 + rng.below(60));
    const double flow = wasserstein1_flow(mu, nu, Metric::euclidean);
    worst_cdf = std::max({worst_cdf, std::abs(flow - wasserstein1_cdf(mu, nu)),
                          std::abs(flow - oracle::w1_line(testing::to_line(mu), testing::to_line(nu)))});
  }
  return {worst_vertex <= kFlowVsVertex && worst_cdf <= kFlowVsCdf,
          "max |flow - enumeration| = " + fmt("%.2e", worst_vertex) + ", max |flow - cdf| = " + fmt("%.2e", worst_cdf)};
}

Outcome process_consistency() {
  const IfsmModel c = models::cantor();
  const SampledFunction id = SampledFunction::sample(PointCloud::grid(c.domain(), 730), [](Coords x) { return x[0]; });
  bool ok = true;
  std::string detail;
  std::uint64_t seed = 1010;
  for (const double x : {0.0, 0.5}) {
    for (std::size_t k = 1; k <= 3; ++k) {
      const ExpectationReport r = conditional_expectation_check(c, id, Point{x}, k, 100'000, seed++);
      ok = ok && r.within(kSigmas);
      detail += std::string(detail.empty() ? "" : ", ") + "z(x=" + fmt("%.1f", x) + ",k=" + std::to_string(k) +
                ") = " + fmt("%+.2f", r.z_score);
    }
  }
  return {ok, detail};
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> all{
      {1, "Hutchinson contraction", 10, hutchinson_contraction},
      {2, "attractor oracle", 30, attractor_oracle},
      {3, "collage bound", 10, collage_bound},
      {4, "Markov contraction", 60, markov_contraction},
      {5, "invariant-measure oracle", 60, invariant_oracle},
      {6, "M-step contraction", 120, m_step_contraction},
      {7, "support equals attractor", 60, support_equals},
      {8, "stability", 120, stability},
      {9, "Wasserstein solver oracle", 30, wasserstein_oracle},
      {10, "process consistency", 60, process_consistency},
  };
  int failures = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.limit_s;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("%s criterion %d (%s): %s [%.2f s, limit %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, c.limit_s, in_time ? "" : ", too slow");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(all.size()) - failures, all.size());
  return failures == 0 ? 0 : 1;
}
