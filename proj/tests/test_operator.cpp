#include <gtest/gtest.h>

#include <array>
#include <cmath>

#include "markovlab/error.hpp"
#include "markovlab/markov_operator.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace markovlab;

namespace {

const oracle::DenseMatrix kDoeblin3{{0.8, 0.1, 0.1}, {0.1, 0.8, 0.1}, {0.1, 0.1, 0.8}};

}  // namespace

TEST(Operator, ApplyExample1) {
  const auto m = build_example1(5);
  EXPECT_EQ(apply(m, dirac(example1_state(3))), dirac(example1_state(2)));
  EXPECT_EQ(apply(m, dirac(StateId(0))), dirac(StateId(0)));
}

TEST(Operator, ApplyDoeblinRow) {
  const auto m = build_doeblin3();
  EXPECT_EQ(apply(m, dirac(StateId(0))), m.kernel_row(StateId(0)));
  EXPECT_DOUBLE_EQ(apply(m, dirac(StateId(0))).weight(StateId(0)), 0.8);
}

TEST(Operator, IterateMatchesOrbitOracle) {
  const auto m = build_example1(5);
  const auto orbit = oracle::example1_orbit(3, 3);  // 1/3 -> 1/2 -> 1 -> 0
  EXPECT_EQ(orbit.back(), 0u);
  EXPECT_EQ(iterate(m, dirac(example1_state(3)), 3), dirac(example1_state(orbit.back())));
  const auto mu = Measure::from_atoms({{StateId(1), 0.5}, {StateId(4), 0.5}});
  EXPECT_EQ(iterate(m, mu, 0), mu);
}

TEST(Operator, InvariantMeasureIsFixed) {
  const auto m = build_doeblin3();
  const auto& pi = *m.invariant_measure();
  Measure current = pi;
  for (int n = 1; n <= 50; ++n) {
    current = apply(m, current);
    ASSERT_LE(max_deviation(current, pi), 1e-12) << n;
  }
}

TEST(Operator, DualApplyDeterministicIsComposition) {
  const auto m = build_example1(10);
  const auto f = identity_on_norm(m);
  const auto uf = dual_apply(m, f);
  for (std::size_t i = 0; i < m.num_states(); ++i) {
    EXPECT_EQ(uf(StateId(i)), f(m.successor(StateId(i))));
  }
  const auto c = constant_observable(m, 0.7);
  const auto uc = dual_apply(m, c);
  for (double v : uc.values()) EXPECT_EQ(v, 0.7);
}

TEST(Operator, DualApplyDoeblinIndicator) {
  const auto m = build_doeblin3();
  const Observable f({1.0, 0.0, 0.0}, 1.0, 1.0);
  const auto expected = oracle::times_col(kDoeblin3, {1.0, 0.0, 0.0});
  const auto uf = dual_apply(m, f);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(uf(StateId(i)), expected[i]);
}

TEST(Operator, DualIterateReachesOne) {
  const auto m = build_example1(60);
  const auto f = identity_on_norm(m);
  for (std::size_t k = 2; k <= 60; ++k) {
    EXPECT_EQ(dual_iterate(m, f, k - 1)(example1_state(k)), 1.0) << k;
  }
  for (std::size_t n = 1; n < 5; ++n) EXPECT_EQ(dual_iterate(m, f, n)(StateId(0)), f(StateId(0)));
  const auto same = dual_iterate(m, f, 0);
  EXPECT_TRUE(std::equal(same.values().begin(), same.values().end(), f.values().begin()));
}

TEST(Operator, CesaroAverage) {
  const auto m = build_example1(10);
  const auto c = cesaro_average(m, constant_observable(m, 2.5), 7);
  for (double v : c.values()) EXPECT_DOUBLE_EQ(v, 2.5);
  EXPECT_THROW(cesaro_average(m, constant_observable(m, 1.0), 0), ArgumentError);
}

TEST(Operator, CesaroRecursionIdentity) {
  gen::Rng rng(21);
  const auto m = build_doeblin3();
  const auto f = gen::observable(rng, m);
  for (std::size_t n = 2; n <= 40; ++n) {
    const auto an = cesaro_average(m, f, n);
    const auto an1 = cesaro_average(m, f, n - 1);
    const auto un = dual_iterate(m, f, n);
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_NEAR(double(n) * an(StateId(i)) - double(n - 1) * an1(StateId(i)), un(StateId(i)), 1e-12);
    }
  }
}

TEST(Operator, CesaroExample2MatchesOrbitOracle) {
  const std::array<std::uint32_t, 1> primes{5};
  const auto m = build_example2(primes);
  const auto f = min1_2norm(m);
  const auto a5 = cesaro_average(m, f, 5);
  const double expected = oracle::example2_cesaro_min1_2norm(5, 1, 5);
  EXPECT_NEAR(expected, 0.76, 1e-15);
  EXPECT_NEAR(a5(example2_state(primes, 5, 1)), expected, 1e-12);
}

TEST(Operator, DobrushinCoefficient) {
  EXPECT_NEAR(dobrushin_coefficient(build_doeblin3()), oracle::dobrushin(kDoeblin3), 1e-15);
  EXPECT_NEAR(dobrushin_coefficient(build_doeblin3()), 0.7, 1e-15);
}

// ---------------------------------------------------------------------------

TEST(OperatorProperty, MassPreservationAndPositiveLinearity) {
  gen::Rng rng(22);
  const std::array<std::uint32_t, 3> primes{2, 3, 5};
  const std::vector<MetricModel> models{build_example1(25), build_example2(primes), build_doeblin3(),
                                        build_halfmap(12)};
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (const auto& m : models) {
    for (int t = 0; t < 100; ++t) {
      const auto mu = gen::probability(rng, m.num_states(), 1 + t % 5);
      const auto nu = gen::probability(rng, m.num_states(), 1 + t % 3);
      EXPECT_NEAR(apply(m, mu).total_mass(), mu.total_mass(), 1e-12);
      const double a = u(rng), b = u(rng);
      const auto lhs = apply(m, combine<double>({{a, mu}, {b, nu}}));
      const auto rhs = combine<double>({{a, apply(m, mu)}, {b, apply(m, nu)}});
      EXPECT_LE(max_deviation(lhs, rhs), 1e-12);
    }
  }
}

TEST(OperatorProperty, FellerSupBoundNonIncreasing) {
  gen::Rng rng(23);
  const auto m = build_doeblin3();
  for (int t = 0; t < 100; ++t) {
    const auto f = gen::observable(rng, m);
    const auto uf = dual_apply(m, f);
    EXPECT_LE(sup_norm(uf.values()), sup_norm(f.values()) + 1e-15);
    EXPECT_LE(uf.sup_bound(), f.sup_bound());
    EXPECT_NO_THROW(validate_observable(uf, m));
  }
}

TEST(OperatorProperty, DobrushinContraction) {
  gen::Rng rng(24);
  const auto m = build_doeblin3();
  const double delta = oracle::dobrushin(kDoeblin3);
  for (int t = 0; t < 100; ++t) {
    const auto f = gen::observable(rng, m);
    const auto uf = dual_apply(m, f);
    EXPECT_LE(oscillation(uf.values()), delta * oscillation(f.values()) + 1e-15);
  }
}
