#include <cmath>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "ifsm/builtin_models.hpp"
#include "ifsm/error.hpp"
#include "ifsm/hutchinson.hpp"
#include "ifsm/markov.hpp"
#include "ifsm/process.hpp"

using namespace ifsm;

TEST_CASE("inverse-cdf selection") {
  const std::vector<double> w{0.25, 0.25, 0.5};
  CHECK(choose_index(w, 0.0) == 0);
  CHECK(choose_index(w, 0.2499) == 0);
  CHECK(choose_index(w, 0.25) == 1);  // strict less-than
  CHECK(choose_index(w, 0.5) == 2);
  CHECK(choose_index(w, 0.9999999) == 2);
  const std::vector<double> z{0.5, 0.5, 0.0};
  CHECK(choose_index(z, 1.0) == 1);  // past the total: last positive atom
  const std::vector<double> lead{0.0, 1.0};
  CHECK(choose_index(lead, 0.0) == 1);
}

TEST_CASE("trajectory examples") {
  const Trajectory t = sample_trajectory(models::halving(), Point{1.0}, 5, 7);
  REQUIRE(t.size() == 6);
  for (std::size_t k = 0; k < t.size(); ++k) CHECK(t.point(k)[0] == std::ldexp(1.0, -static_cast<int>(k)));
  CHECK(t.chosen == std::vector<std::uint32_t>(5, 0));

  const IfsmModel c = models::cantor();
  const Trajectory a = sample_trajectory(c, Point{0.0}, 1000, 42);
  const Trajectory b = sample_trajectory(c, Point{0.0}, 1000, 42);
  const Trajectory other = sample_trajectory(c, Point{0.0}, 1000, 43);
  CHECK(a.chosen == b.chosen);
  CHECK(a.points == b.points);
  CHECK(a.chosen != other.chosen);
  CHECK(a.seed == 42);

  CHECK(sample_trajectory(c, Point{0.3}, 0, 1).size() == 1);
  CHECK_THROWS_AS(sample_trajectory(c, Point{1.5}, 3, 1), DomainError);
  CHECK_THROWS_AS(sample_trajectory(c, Point{0.0, 0.0}, 3, 1), DimensionMismatch);
}

TEST_CASE("trajectory points are recomputable from the chosen indices") {
  for (const char* name : {"mixture", "gifs_skew", "sierpinski"}) {
    const IfsmModel m = models::by_name(name);
    const std::vector<double> z0(m.dim(), 0.5);
    const Trajectory t = sample_trajectory(m, z0, 500, 9);
    REQUIRE(t.chosen.size() + 1 == t.size());
    for (std::size_t k = 0; k + 1 < t.size(); ++k) CHECK(m.eval_map(t.chosen[k], t.point(k)) == Point(t.point(k + 1)));
  }
}

TEST_CASE("chosen indices follow the weights") {
  const std::size_t n = 1'000'000;
  const Trajectory t = sample_trajectory(models::cantor(), Point{0.0}, n, 2024);
  std::size_t zeros = 0;
  for (auto j : t.chosen) zeros += j == 0;
  const double sigma = std::sqrt(0.25 / static_cast<double>(n));
  CHECK(std::abs(static_cast<double>(zeros) / static_cast<double>(n) - 0.5) <= 3.0 * sigma);

  // place-dependent weights: the frequency of index 1 given Z_k matches q
  const IfsmModel m = models::mixture();
  const Trajectory u = sample_trajectory(m, Point{0.5}, 200'000, 5);
  double expected = 0.0, hits = 0.0, var = 0.0;
  for (std::size_t k = 0; k < u.chosen.size(); ++k) {
    const double p1 = m.weight_vector(u.point(k))[1];
    expected += p1;
    var += p1 * (1.0 - p1);
    hits += u.chosen[k] == 1;
  }
  CHECK(std::abs(hits - expected) <= 4.0 * std::sqrt(var));
}

TEST_CASE("empirical measure examples") {
  const Trajectory h = sample_trajectory(models::halving(), Point{1.0}, 2000, 1);
  const DiscreteMeasure e = empirical_measure(h, kDefaultBurnIn, Box::unit(1), 729);
  REQUIRE(e.size() == 1);
  CHECK(e.atom(0)[0] == 0.5 / 729.0);
  CHECK(e.weight(0) == 1.0);

  const Trajectory fixed = sample_trajectory(models::cantor(), Point{1.0}, 50, 1);
  (void)fixed;
  const Trajectory still = sample_trajectory(models::h4_violating(), Point{0.0}, 50, 1);
  const DiscreteMeasure d = empirical_measure(still, 10, Box::unit(1), 0);
  REQUIRE(d.size() == 1);
  CHECK(d.atom(0)[0] == 0.0);

  CHECK_THROWS_AS(empirical_measure(still, 51, Box::unit(1), 0), DomainError);
}

TEST_CASE("chaos game agrees with the invariant-measure solver") {
  const IfsmModel c = models::cantor();
  const Trajectory t = sample_trajectory(c, Point{0.0}, 1'000'000, 77);
  const DiscreteMeasure emp = empirical_measure(t, kDefaultBurnIn, c.domain(), 729);
  const InvariantResult inv = invariant_measure(c, std::nullopt, {729, 1e-6, 500});
  CHECK(wasserstein1(emp, inv.measure, Metric::euclidean) <= 0.01);
}

TEST_CASE("conditional expectation examples") {
  const IfsmModel c = models::cantor();
  const SampledFunction one = SampledFunction::constant(Box::unit(1), 2.5);
  const ExpectationReport k1c = conditional_expectation_check(c, one, Point{0.0}, 1, 100, 3);
  CHECK(k1c.mc_mean == 2.5);
  CHECK(k1c.exact == 2.5);
  CHECK(k1c.std_error == 0.0);
  CHECK(k1c.within(4.0));

  const SampledFunction id = SampledFunction::sample(PointCloud::grid(Box::unit(1), 730), [](Coords x) { return x[0]; });
  const ExpectationReport k1 = conditional_expectation_check(c, id, Point{0.0}, 1, 100'000, 11);
  CHECK(std::abs(k1.exact - 1.0 / 3.0) <= 1e-12);
  CHECK(k1.within(4.0));
  const ExpectationReport k2 = conditional_expectation_check(c, id, Point{0.0}, 2, 100'000, 12);
  CHECK(std::abs(k2.exact - 4.0 / 9.0) <= 1e-12);
  CHECK(k2.within(4.0));
  CHECK(k2.samples == 100'000);

  CHECK_THROWS_AS(conditional_expectation_check(c, id, Point{0.0}, 0, 10, 1), DomainError);
  CHECK_THROWS_AS(conditional_expectation_check(c, id, Point{0.0}, 1, 0, 1), DomainError);
}

TEST_CASE("ensemble distribution follows the Markov operator") {
  const IfsmModel m = models::mixture();
  const std::size_t n = 20'000;
  const auto pos = ensemble_positions(m, Point{0.9}, 4, n, 31);
  REQUIRE(pos.size() == 5);
  const double tol = 3.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t k = 1; k + 1 < pos.size(); ++k) {
    const DiscreteMeasure now = DiscreteMeasure::uniform(pos[k]);
    const DiscreteMeasure next = DiscreteMeasure::uniform(pos[k + 1]);
    const DiscreteMeasure pushed = markov_push(m, merge_duplicates(now), 0);
    CHECK(wasserstein1(next, pushed, Metric::euclidean) <= tol);
  }
  // reproducible
  CHECK(ensemble_positions(m, Point{0.9}, 2, 10, 31)[2].flat() == ensemble_positions(m, Point{0.9}, 2, 10, 31)[2].flat());
}

TEST_CASE("trajectories stay near the attractor after burn-in") {
  for (const char* name : {"cantor", "sierpinski", "mixture"}) {
    const IfsmModel m = models::by_name(name);
    const std::size_t res = 243;
    const AttractorResult a = attractor(m, PointCloud(m.domain().corners()), {res});
    REQUIRE(a.log.converged);
    const double eps = CellGrid(m.domain(), res).snap_error(m.metric()) / (1.0 - 0.5) + a.tol;
    const Trajectory t = sample_trajectory(m, std::vector<double>(m.dim(), 0.37), 20'000, 3);
    const NearestIndex idx(a.cloud, m.metric());
    double worst = 0.0;
    for (std::size_t k = kDefaultBurnIn; k < t.size(); ++k) worst = std::max(worst, idx.nearest_distance(t.point(k)));
    CHECK(worst <= eps);
  }
}
