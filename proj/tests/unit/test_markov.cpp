#include <cmath>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "ifsm/analysis.hpp"
#include "ifsm/builtin_models.hpp"
#include "ifsm/error.hpp"
#include "ifsm/markov.hpp"
#include "ifsm/transport.hpp"

using namespace ifsm;

namespace {

SampledFunction identity_1d(std::size_t n = 730) {
  return SampledFunction::sample(PointCloud::grid(Box::unit(1), n), [](Coords x) { return x[0]; });
}

// Random 1-Lipschitz function: distance to a point minus distance to another.
SampledFunction random_lipschitz(Rng& rng, const Box& box, std::size_t per_axis, Metric m) {
  const Point p{rng.uniform(), rng.uniform()}, q{rng.uniform(), rng.uniform()};
  const std::size_t d = box.dim();
  return SampledFunction::sample(
      PointCloud::grid(box, per_axis),
      [&, d](Coords x) {
        const Point pp(std::vector<double>(p.coords().begin(), p.coords().begin() + d));
        const Point qq(std::vector<double>(q.coords().begin(), q.coords().begin() + d));
        return 0.5 * (distance(x, pp, m) - distance(x, qq, m));
      },
      m, 1.0);
}

// W1 between composed measures on Lambda^k with the sum-of-coordinates metric.
double composed_w1(const IfsmModel& model, const ComposedMeasure& a, const ComposedMeasure& b) {
  std::vector<double> cost;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) {
      double c = 0.0;
      for (std::size_t k = 0; k < a.depth; ++k) c += model.params().distance(a.tuple(i)[k], b.tuple(j)[k]);
      cost.push_back(c);
    }
  return solve_transport(a.weights, b.weights, cost).cost;
}

double total_mass(const DiscreteMeasure& mu) {
  double s = 0.0;
  for (double w : mu.weights()) s += w;
  return s;
}

}  // namespace

TEST_CASE("sampled functions use the nearest grid value") {
  const SampledFunction f(PointCloud(1, {0.0, 0.5, 1.0}), {10.0, 20.0, 30.0});
  CHECK(f(Point{0.2}) == 10.0);
  CHECK(f(Point{0.25}) == 10.0);  // tie goes to the lower index
  CHECK(f(Point{0.3}) == 20.0);
  CHECK(f(Point{2.0}) == 30.0);

  const SampledFunction lattice = SampledFunction::sample(PointCloud::grid(Box::unit(1), 3), [](Coords x) { return x[0]; });
  CHECK(lattice(Point{0.25}) == 0.0);
  CHECK(lattice(Point{0.26}) == 0.5);

  const SampledFunction c = SampledFunction::constant(Box::unit(2), 4.5);
  CHECK(c(Point{0.1, 0.9}) == 4.5);
  CHECK_THROWS_AS(SampledFunction(PointCloud(1, {0.0}), {1.0, 2.0}), DimensionMismatch);
  CHECK_THROWS_AS(SampledFunction(PointCloud(1, {0.0}), {NAN}), DomainError);
}

TEST_CASE("lattice lookup matches a nearest-neighbour scan") {
  Rng rng(73);
  for (Metric m : {Metric::euclidean, Metric::max_coord}) {
    const PointCloud grid = PointCloud::grid(Box({0.0, -1.0}, {2.0, 1.0}), {7, 12});
    std::vector<double> v(grid.size());
    for (auto& x : v) x = rng.uniform();
    const SampledFunction lat(grid, v, m);
    // same points without the lattice tag go through the index
    const SampledFunction irregular(PointCloud(2, grid.flat()), v, m);
    for (int k = 0; k < 500; ++k) {
      const Point q{rng.uniform(0.0, 2.0), rng.uniform(-1.0, 1.0)};
      CHECK(lat(q) == irregular(q));
    }
  }
}

TEST_CASE("transfer operator examples") {
  const IfsmModel c = models::cantor();
  const SampledFunction one = SampledFunction::constant(Box::unit(1), 1.0);
  for (double x : {0.0, 0.4, 1.0}) CHECK(std::abs(transfer_apply(c, one, Point{x}) - 1.0) <= 1e-15);
  const SampledFunction id = identity_1d();
  CHECK(std::abs(transfer_apply(c, id, Point{0.0}) - 1.0 / 3.0) <= 1e-12);
  CHECK(std::abs(transfer_apply(c, id, Point{1.0}) - 2.0 / 3.0) <= 1e-12);

  CHECK(transfer_apply_M(c, id, Point{0.3}, 1) == transfer_apply(c, id, Point{0.3}));
  for (std::size_t m : {1u, 2u, 5u}) CHECK(std::abs(transfer_apply_M(models::mixture(), one, Point{0.7}, m) - 1.0) <= 1e-12);
  // (0 + 2/9 + 2/3 + 8/9) / 4
  CHECK(std::abs(transfer_apply_M(c, id, Point{0.0}, 2) - 4.0 / 9.0) <= 1e-12);
}

TEST_CASE("M-step transfer equals nested one-step transfer up to interpolation") {
  Rng rng(79);
  const IfsmModel m = models::mixture();
  const std::size_t n = 2001;
  const PointCloud grid = PointCloud::grid(Box::unit(1), n);
  const double h = 1.0 / static_cast<double>(n - 1);
  const SampledFunction f = SampledFunction::sample(grid, [](Coords x) { return std::sin(3.0 * x[0]); });
  const SampledFunction bf = SampledFunction::sample(grid, [&](Coords x) { return transfer_apply(m, f, x); });
  for (int k = 0; k < 50; ++k) {
    const Point x{rng.uniform()};
    // g = B f is Lipschitz with constant at most 3 (|f'| <= 3 and the budget is below 1, plus the weight term)
    CHECK(std::abs(transfer_apply_M(m, f, x, 2) - transfer_apply(m, bf, x)) <= 6.0 * h);
  }
}

TEST_CASE("markov_push examples") {
  const DiscreteMeasure fixed = markov_push(models::halving(), DiscreteMeasure::dirac(Point{0.0}), 0);
  REQUIRE(fixed.size() == 1);
  CHECK(fixed.atom(0)[0] == 0.0);
  CHECK(fixed.weight(0) == 1.0);

  const DiscreteMeasure two = markov_push(models::cantor(), DiscreteMeasure::dirac(Point{0.0}), 0);
  REQUIRE(two.size() == 2);
  CHECK(two.atom(0)[0] == 0.0);
  CHECK(std::abs(two.atom(1)[0] - 2.0 / 3.0) <= 1e-16);
  CHECK(two.weight(0) == 0.5);
  CHECK(two.weight(1) == 0.5);

  // five pushes of a point mass give the depth-5 Cantor atoms
  DiscreteMeasure mu = DiscreteMeasure::dirac(Point{0.0});
  for (int k = 0; k < 5; ++k) mu = markov_push(models::cantor(), mu, 0);
  CHECK(support(mu).size() == 32);
  const auto left = oracle::cantor_endpoints(5);
  for (std::size_t i = 0; i < mu.size(); ++i) CHECK(std::abs(mu.atom(i)[0] - left[2 * i]) <= 1e-15);

  // zero-probability branches vanish
  const DiscreteMeasure h4 = markov_push(models::h4_violating(), DiscreteMeasure::dirac(Point{0.5}), 0);
  CHECK(h4.size() == 1);
  CHECK_THROWS_AS(markov_push(models::cantor(), DiscreteMeasure::dirac(Point{0.0, 0.0}), 0), DimensionMismatch);
}

TEST_CASE("markov_push is dual to the transfer operator") {
  Rng rng(83);
  for (const char* name : {"cantor", "mixture", "thermodynamic", "gifs_skew", "sierpinski"}) {
    const IfsmModel m = models::by_name(name);
    for (int k = 0; k < 10; ++k) {
      const DiscreteMeasure mu = testing::random_measure(rng, m.domain(), 1 + rng.below(30));
      const SampledFunction f = random_lipschitz(rng, m.domain(), 64, m.metric());
      const double rhs = mu.integrate([&](Coords x) { return transfer_apply(m, f, x); });
      // exact images: identical up to rounding
      const DiscreteMeasure exact = markov_push(m, mu, 0);
      CHECK(std::abs(exact.integrate(f) - rhs) <= 1e-12);
      // binned images move each atom by at most half a cell; f is 1-Lipschitz
      // and the nearest-grid interpolation adds one grid cell on either side
      const std::size_t res = 32;
      const DiscreteMeasure binned = markov_push(m, mu, res);
      const double snap = CellGrid(m.domain(), res).snap_error(m.metric());
      const double interp = CellGrid(m.domain(), 63).cell_diameter(m.metric());
      CHECK(std::abs(binned.integrate(f) - rhs) <= snap + interp + 1e-12);
    }
  }
}

TEST_CASE("markov_push conserves mass and positivity") {
  Rng rng(89);
  for (const auto& name : models::names()) {
    const IfsmModel m = models::by_name(name);
    for (std::size_t res : {0u, 7u, 100u}) {
      const DiscreteMeasure mu = testing::random_measure(rng, m.domain(), 50);
      const DiscreteMeasure out = markov_push(m, mu, res);
      CHECK(std::abs(total_mass(out) - 1.0) <= 1e-12);
      for (double w : out.weights()) CHECK(w > 0.0);
      if (res > 0) CHECK(out.size() <= std::pow(res, m.dim()));
    }
  }
}

TEST_CASE("Markov operator contracts W1 by s + r t") {
  Rng rng(97);
  for (const char* name : {"mixture", "thermodynamic"}) {
    const IfsmModel m = models::by_name(name);
    const HypothesisReport rep = check_hypotheses(m);
    const double c = rep.budget1;
    REQUIRE(c < 1.0);
    for (int k = 0; k < 20; ++k) {
      const DiscreteMeasure mu = testing::random_measure(rng, m.domain(), 2 + rng.below(20));
      const DiscreteMeasure nu = testing::random_measure(rng, m.domain(), 2 + rng.below(20));
      const double before = wasserstein1(mu, nu, m.metric());
      CHECK(wasserstein1(markov_push(m, mu, 0), markov_push(m, nu, 0), m.metric()) <= c * before + 1e-9);
      const std::size_t res = 243;
      const double bin = CellGrid(m.domain(), res).snap_error(m.metric());
      CHECK(wasserstein1(markov_push(m, mu, res), markov_push(m, nu, res), m.metric()) <= c * before + 2.0 * bin + 1e-9);
    }
  }
}

TEST_CASE("skew system contracts after M pushes") {
  const IfsmModel g = models::gifs_skew();
  const HypothesisReport rep = check_hypotheses(g);
  CHECK(rep.M == 2);
  const double c = rep.budget2;
  CHECK(std::abs(c - (0.5 + 0.6 * 2 * 0.2)) <= 1e-12);
  Rng rng(101);
  for (int k = 0; k < 10; ++k) {
    const DiscreteMeasure mu = testing::random_measure(rng, g.domain(), 2 + rng.below(10));
    const DiscreteMeasure nu = testing::random_measure(rng, g.domain(), 2 + rng.below(10));
    const double before = wasserstein1(mu, nu, Metric::max_coord);
    const double after = wasserstein1(markov_push_M(g, mu, 2, 0), markov_push_M(g, nu, 2, 0), Metric::max_coord);
    CHECK(after <= c * before + 1e-9);
  }
  CHECK_THROWS_AS(markov_push_M(g, DiscreteMeasure::dirac(Point{0.0, 0.0}), 0, 0), DomainError);
}

TEST_CASE("composed measures are k t Lipschitz in the base point") {
  Rng rng(103);
  for (const char* name : {"mixture", "thermodynamic", "gifs_skew"}) {
    const IfsmModel m = models::by_name(name);
    const double t = check_hypotheses(m).t.value;
    for (std::size_t k = 1; k <= 4; ++k)
      for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> x(m.dim()), y(m.dim());
        for (auto& v : x) v = rng.uniform();
        for (auto& v : y) v = rng.uniform();
        const double d = composed_w1(m, m.composed_measure(k, x), m.composed_measure(k, y));
        CHECK(d <= static_cast<double>(k) * t * distance(x, y, m.metric()) + 1e-9);
      }
  }
}

TEST_CASE("invariant measure examples") {
  const InvariantResult h = invariant_measure(models::halving(), std::nullopt, {729, 1e-6, 500});
  CHECK(h.log.converged);
  CHECK(wasserstein1(h.measure, DiscreteMeasure::dirac(Point{0.0}), Metric::euclidean) <= 0.5 / 729.0 + 1e-6);

  const IfsmModel c = models::cantor();
  InvariantOptions opts{729, 1e-4, 500, 1.0 / 3.0};
  const InvariantResult r = invariant_measure(c, std::nullopt, opts);
  CHECK(r.log.converged);
  CHECK(std::abs(cdf(r.measure, 1.0 / 3.0) - 0.5) <= 1e-4);
  REQUIRE(r.log.residual_bound);
  CHECK(std::abs(*r.log.residual_bound - (1.0 / 729.0) / (2.0 * (1.0 - 1.0 / 3.0))) <= 1e-15);
  CHECK(r.log.deltas.back() < 1e-4);
  const double depth10 = wasserstein1(r.measure, testing::from_line(oracle::cantor_measure(10)), Metric::euclidean);
  CHECK(depth10 <= *r.log.residual_bound + 1e-4 + std::pow(3.0, -10));

  // the observed ratio stays within the contraction constant plus binning noise
  CHECK(r.log.observed_ratio <= 1.0 / 3.0 + 0.1);

  CHECK_THROWS_AS(invariant_measure(c, std::nullopt, {0, 1e-4, 10}), DomainError);
  CHECK_THROWS_AS(invariant_measure(c, std::nullopt, {729, 0.0, 10}), DomainError);
  const InvariantResult cut = invariant_measure(c, std::nullopt, {729, 1e-12, 2});
  CHECK_FALSE(cut.log.converged);
  CHECK(cut.log.iterations == 2);
}

TEST_CASE("mixture fixed point satisfies the decomposition by nu1 and nu2") {
  const IfsmModel m = models::mixture();
  const InvariantResult r = invariant_measure(m, std::nullopt, {729, 1e-6, 500});
  REQUIRE(r.log.converged);
  const DiscreteMeasure& mu = r.measure;
  // T_{nu1}((1 - h) mu) + T_{nu2}(h mu), assembled by hand
  const auto& w = std::get<MixtureWeights>(m.weights());
  std::vector<double> atoms, mass;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double x = mu.atom(i)[0];
    const double h = x;
    for (std::size_t j = 0; j < 2; ++j) {
      atoms.push_back(x / 3.0 + (j == 1 ? 2.0 / 3.0 : 0.0));
      mass.push_back(mu.weight(i) * ((1.0 - h) * w.nu1[j] + h * w.nu2[j]));
    }
  }
  const DiscreteMeasure split = normalize(PointCloud(1, atoms), mass);
  CHECK(wasserstein1(split, markov_push(m, mu, 0), Metric::euclidean) <= 1e-12);
  // and mu is a fixed point up to binning and tolerance
  CHECK(wasserstein1(split, mu, Metric::euclidean) <= 0.5 / 729.0 + 1e-6);
}

TEST_CASE("invariant measure accepts a starting measure") {
  const IfsmModel c = models::cantor();
  const InvariantResult a = invariant_measure(c, DiscreteMeasure::dirac(Point{0.5}), {729, 1e-6, 500});
  const InvariantResult b = invariant_measure(c, std::nullopt, {729, 1e-6, 500});
  CHECK(a.log.converged);
  CHECK(wasserstein1(a.measure, b.measure, Metric::euclidean) <= 2.0 / 729.0);
  // exact atoms without a grid
  const InvariantResult e = invariant_measure(models::halving(), DiscreteMeasure::dirac(Point{1.0}), {0, 1e-6, 100});
  CHECK(e.log.converged);
  CHECK(e.measure.atom(0)[0] < 1e-5);
}
