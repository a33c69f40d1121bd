#include <benchmark/benchmark.h>

#include <random>

#include "markovlab/decomposition.hpp"
#include "markovlab/flat_metric.hpp"
#include "markovlab/markov_operator.hpp"

using namespace markovlab;

namespace {

MetricModel random_line_model(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> gap(0.05, 0.5), w(0.1, 1.0);
  std::vector<double> pos{0.0};
  for (std::size_t i = 1; i < n; ++i) pos.push_back(pos.back() + gap(rng));
  Matrix p(n, std::vector<double>(n)), d(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      total += p[i][j] = w(rng);
      d[i][j] = std::abs(pos[i] - pos[j]);
    }
    for (auto& x : p[i]) x /= total;
  }
  return build_doeblin(p, d, "bench");
}

Measure spread(std::size_t n, std::size_t offset) {
  std::vector<Atom<double>> atoms;
  for (std::size_t i = offset; i < n; i += 2) atoms.push_back({StateId(i), 1.0});
  auto mu = Measure::from_atoms(std::move(atoms));
  return scale(mu, 1.0 / mu.total_mass());
}

void BM_FlatDistance(benchmark::State& state) {
  const auto n = std::size_t(state.range(0));
  const auto model = random_line_model(n, 1);
  const auto mu = spread(n, 0);
  const auto nu = spread(n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(flat_distance(mu, nu, model));
}
BENCHMARK(BM_FlatDistance)->Arg(8)->Arg(16)->Arg(32)->Arg(64);

void BM_DualIterateExample1(benchmark::State& state) {
  const auto model = build_example1(std::size_t(state.range(0)));
  const auto f = identity_on_norm(model);
  for (auto _ : state) benchmark::DoNotOptimize(dual_iterate(model, f, 1000));
}
BENCHMARK(BM_DualIterateExample1)->Arg(100)->Arg(1000);

void BM_DecomposeRational(benchmark::State& state) {
  const auto model = build_doeblin3();
  DecompositionConfig cfg;
  cfg.start = StateId(1);
  cfg.center = StateId(0);
  cfg.radius = 0.5;
  cfg.alpha = 1.0 / 6.0;
  cfg.levels = std::size_t(state.range(0));
  for (auto _ : state) {
    const auto tree = decompose<Rational>(model, cfg);
    benchmark::DoNotOptimize(verify_telescoping(model, cfg, tree));
  }
}
BENCHMARK(BM_DecomposeRational)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
