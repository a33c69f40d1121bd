#include <gtest/gtest.h>

#include <random>

#include "markovlab/error.hpp"
#include "markovlab/flat_metric.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace markovlab;

namespace {

FlatMetricProblem problem(std::vector<double> c, const std::vector<std::vector<double>>& d) {
  FlatMetricProblem p;
  p.coefficients = std::move(c);
  for (std::size_t i = 0; i < d.size(); ++i) {
    p.points.push_back(StateId(i));
    p.distances.insert(p.distances.end(), d[i].begin(), d[i].end());
  }
  return p;
}

std::vector<std::vector<double>> table(const FlatMetricProblem& p) {
  std::vector<std::vector<double>> d(p.size(), std::vector<double>(p.size()));
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = 0; j < p.size(); ++j) d[i][j] = p.distance(i, j);
  }
  return d;
}

MetricModel line_model(const std::vector<double>& pts) {
  const Matrix p(pts.size(), std::vector<double>(pts.size(), 1.0 / double(pts.size())));
  return build_doeblin(p, gen::line_metric(pts), "line");
}

}  // namespace

TEST(SolveLp, SinglePoint) {
  const auto s = solve_lp(problem({1.0}, {{0.0}}));
  EXPECT_NEAR(s.value, 1.0, 1e-12);
  ASSERT_EQ(s.potential.size(), 1u);
  EXPECT_NEAR(s.potential[0], 1.0, 1e-12);
}

TEST(SolveLp, BoxBindsBeforeLipschitz) {
  EXPECT_NEAR(solve_lp(problem({1.0, -1.0}, {{0, 3}, {3, 0}})).value, 2.0, 1e-12);
}

TEST(SolveLp, LipschitzBinds) {
  const auto p = problem({1.0, -1.0}, {{0, 0.4}, {0.4, 0}});
  const double lp = solve_lp(p).value;
  EXPECT_NEAR(lp, 0.4, 1e-12);
  EXPECT_NEAR(oracle::flat_grid_search(p.coefficients, table(p), 1e-3), 0.4, 2e-3);
}

TEST(SolveLp, OptimizerIsFeasible) {
  gen::Rng rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    const auto pts = gen::line_points(rng, 6, 1.0);
    std::vector<double> c(6);
    for (auto& x : c) x = u(rng);
    const auto p = problem(c, gen::line_metric(pts));
    const auto s = solve_lp(p);
    double value = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
      EXPECT_LE(std::abs(s.potential[i]), 1.0 + 1e-9);
      value += c[i] * s.potential[i];
      for (std::size_t j = 0; j < 6; ++j) {
        EXPECT_LE(s.potential[i] - s.potential[j], p.distance(i, j) + 1e-9);
      }
    }
    EXPECT_NEAR(value, s.value, 1e-9);
  }
}

TEST(SolveLp, DegenerateProblemsTerminate) {
  // Equidistant points and tied coefficients produce many degenerate pivots.
  const std::size_t n = 12;
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.5));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0.0;
  std::vector<double> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = (i % 2 == 0) ? 1.0 : -1.0;
  const auto s = solve_lp(problem(c, d));
  EXPECT_NEAR(s.value, 0.5 * double(n / 2), 1e-9);
}

TEST(FlatDistance, Basics) {
  const auto m = line_model({0.0, 1.0, 4.0});
  const auto mu = Measure::from_atoms({{StateId(0), 0.5}, {StateId(1), 0.5}});
  EXPECT_EQ(flat_distance(mu, mu, m), 0.0);
  EXPECT_NEAR(flat_distance(dirac(StateId(0)), dirac(StateId(1)), m), 1.0, 1e-12);
  EXPECT_NEAR(flat_distance(dirac(StateId(0)), dirac(StateId(2)), m), 2.0, 1e-12);
  EXPECT_NEAR(flat_distance(mu, dirac(StateId(0)), m), 0.5, 1e-12);
  EXPECT_EQ(flat_distance(Measure{}, Measure{}, m), 0.0);
}

TEST(FlatDistance, HalfAgainstGridOracle) {
  // mu = (1/2, 1/2) on {a, b}, nu = delta_a, d(a, b) = 1.
  const auto p = problem({-0.5, 0.5}, {{0, 1}, {1, 0}});
  EXPECT_NEAR(oracle::flat_grid_search(p.coefficients, table(p), 1e-3), 0.5, 2e-3);
}

TEST(FlatDistanceProperty, DiracPairs) {
  gen::Rng rng(32);
  const auto pts = gen::line_points(rng, 30, 0.4);
  const auto m = line_model(pts);
  std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
  for (int t = 0; t < 100; ++t) {
    const StateId x(pick(rng)), y(pick(rng));
    EXPECT_NEAR(flat_distance(dirac(x), dirac(y), m), std::min(m.distance(x, y), 2.0), 1e-9);
  }
}

TEST(FlatDistanceProperty, MatchesGridSearchOnSmallProblems) {
  gen::Rng rng(33);
  for (int t = 0; t < 12; ++t) {
    const std::size_t n = 2 + t % 3;  // 2..4 points
    const auto pts = gen::line_points(rng, n, 1.2);
    const auto m = line_model(pts);
    const auto mu = gen::probability(rng, n, n);
    const auto nu = gen::probability(rng, n, 1 + t % n);
    const auto p = make_flat_problem(mu, nu, m);
    const double lp = flat_distance(mu, nu, m);
    const double grid = oracle::flat_grid_search(p.coefficients, table(p), 1e-3);
    EXPECT_NEAR(lp, grid, 2e-3) << p.dump();
    EXPECT_GE(lp, grid - 1e-9);
  }
}

TEST(FlatDistanceProperty, MetricAxiomsAndBounds) {
  gen::Rng rng(34);
  const auto pts = gen::line_points(rng, 10, 0.6);
  const auto m = line_model(pts);
  for (int t = 0; t < 200; ++t) {
    const auto a = gen::probability(rng, 10, 1 + t % 4);
    const auto b = gen::probability(rng, 10, 1 + t % 5);
    const auto c = gen::probability(rng, 10, 1 + t % 3);
    const double ab = flat_distance(a, b, m);
    EXPECT_EQ(ab, flat_distance(b, a, m));
    EXPECT_LE(flat_distance(a, c, m), ab + flat_distance(b, c, m) + 1e-9);
    EXPECT_LE(ab, 2.0 + 1e-12);
    double tv = 0.0;
    for (const auto& x : make_flat_problem(a, b, m).coefficients) tv += std::abs(x);
    EXPECT_LE(ab, tv + 1e-12);
    EXPECT_EQ(flat_distance(a, a, m), 0.0);
  }
}

TEST(FlatDistanceProperty, Convexity) {
  gen::Rng rng(35);
  const auto pts = gen::line_points(rng, 8, 0.8);
  const auto m = line_model(pts);
  for (int t = 0; t < 60; ++t) {
    const auto m1 = gen::probability(rng, 8, 3);
    const auto m2 = gen::probability(rng, 8, 4);
    const auto nu = gen::probability(rng, 8, 2);
    for (double s : {0.25, 0.5, 0.75}) {
      const auto mix = combine<double>({{s, m1}, {1.0 - s, m2}});
      EXPECT_LE(flat_distance(mix, nu, m),
                s * flat_distance(m1, nu, m) + (1.0 - s) * flat_distance(m2, nu, m) + 1e-9);
    }
  }
}

TEST(FlatDistance, LargeUnionSupport) {
  const auto m = build_example1(150);
  std::vector<Atom<double>> a, b;
  for (std::size_t k = 1; k <= 150; ++k) (k % 2 ? a : b).push_back({StateId(k), 1.0});
  auto mu = Measure::from_atoms(a);
  auto nu = Measure::from_atoms(b);
  mu = scale(mu, 1.0 / mu.total_mass());
  nu = scale(nu, 1.0 / nu.total_mass());
  const double d = flat_distance(mu, nu, m);
  EXPECT_GT(d, 0.0);
  EXPECT_LE(d, 1.0);
}
