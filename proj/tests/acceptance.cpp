// Acceptance gate: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "markovlab/decomposition.hpp"
#include "markovlab/diagnostics.hpp"
#include "markovlab/flat_metric.hpp"
#include "markovlab/markov_operator.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace markovlab;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail << what;
    }
  }
};

struct Criterion {
  int id;
  const char* title;
  double budget_seconds;
  std::function<void(Outcome&)> body;
};

// example1 ladder: probes 1/m, m = 5..100, target 0.
ProbePlan example1_ladder(std::size_t horizon, std::size_t tail_start) {
  ProbePlan plan{example1_state(0), {}, horizon, tail_start};
  for (std::size_t m = 5; m <= 100; ++m) plan.probes.push_back(example1_state(m));
  return plan;
}

void example1_eproperty(Outcome& out) {
  constexpr double kTol = 1e-12;
  const auto model = build_example1(100);
  const auto report = eproperty_profile(model, identity_on_norm(model), example1_ladder(200, 1));
  for (const auto& r : report.rows) {
    out.require(std::abs(r.gap - 1.0) <= kTol, "gap != 1 at state " + std::to_string(r.probe.value));
  }
  out.require(report.verdict.kind == VerdictKind::fails && std::abs(report.verdict.level - 1.0) <= kTol,
              "verdict " + report.verdict.to_string());
  out.detail << "probes=" << report.rows.size() << " verdict=" << report.verdict.to_string();
}

void example1_cesaro(Outcome& out) {
  constexpr double kGapLimit = 0.01;
  constexpr std::size_t kHorizon = 10000;
  constexpr std::size_t kTailStart = 5000;
  const auto model = build_example1(100);
  const auto report =
      cesaro_profile(model, identity_on_norm(model), example1_ladder(kHorizon, kTailStart), kGapLimit);
  double worst = 0.0;
  for (const auto& r : report.rows) {
    worst = std::max(worst, r.gap);
    // A_n f(1/m) = H_{m-1} / n once the orbit has reached 0, largest at n = tail start.
    const auto m = std::size_t(std::lround(1.0 / r.distance));
    double h = 0.0;
    for (std::size_t j = 1; j < m; ++j) h += 1.0 / double(j);
    out.require(std::abs(r.gap - h / double(kTailStart)) <= 1e-12, "gap differs from orbit value");
    out.require(r.gap <= kGapLimit, "gap above 0.01");
  }
  out.require(report.verdict.kind == VerdictKind::holds_at_horizon, "verdict " + report.verdict.to_string());
  out.detail << "max gap=" << format_number(worst) << " verdict=" << report.verdict.to_string();
}

void example2_cesaro(Outcome& out) {
  constexpr double kTol = 1e-12;
  const std::vector<std::uint32_t> primes{2, 3, 5, 7, 11, 13};
  const auto model = build_example2(primes);
  const auto f = min1_2norm(model);
  for (auto k : primes) {
    const auto avg = cesaro_average(model, f, k);
    const double gap = std::abs(avg(example2_state(primes, k, 1)) - avg(StateId(0)));
    const double expected = oracle::example2_cesaro_min1_2norm(k, 1, k);
    out.require(gap >= 0.5, "gap below 1/2 for k=" + std::to_string(k));
    out.require(std::abs(gap - expected) <= kTol, "gap differs from orbit oracle for k=" + std::to_string(k));
    if (k == 5) out.require(std::abs(gap - 0.76) <= kTol, "k=5 gap is not 0.76");
    out.detail << "k=" << k << ":" << format_number(gap) << ' ';
  }
}

void doeblin_control(Outcome& out) {
  constexpr double kDelta = 0.7;
  constexpr std::size_t kHorizon = 60;
  constexpr std::size_t kTraceLength = 50;
  constexpr double kLemmaEps = 0.1;
  const auto model = build_doeblin3();
  out.require(std::abs(dobrushin_coefficient(model) - kDelta) <= 1e-12, "Dobrushin coefficient != 0.7");
  gen::Rng rng(20240401);
  std::size_t lemma_hits = 0;
  for (int t = 0; t < 100; ++t) {
    const auto f = gen::observable(rng, model);
    const auto target = StateId(std::size_t(t % 3));
    // Window [n, horizon]: the tail sup must sit below the bound at its left end.
    for (std::size_t n = 1; n <= kHorizon; ++n) {
      const auto report = eproperty_profile(model, f, default_probe_plan(model, target, kHorizon, n));
      const double bound = 2.0 * std::pow(kDelta, double(n)) * f.sup_bound();
      for (const auto& r : report.rows) {
        out.require(r.gap <= bound, "e-property gap above 2*0.7^n*|f| at n=" + std::to_string(n));
      }
    }
    const auto search = find_lemma_ball(model, f, kLemmaEps, default_candidate_balls(model), kHorizon);
    if (search.found) ++lemma_hits;
  }
  out.require(lemma_hits == 100, "find_lemma_ball failed for some f");
  std::vector<Measure> starts{dirac(StateId(0)), dirac(StateId(1)), dirac(StateId(2))};
  for (int t = 0; t < 5; ++t) starts.push_back(gen::probability(rng, 3, 2 + t % 2));
  for (const auto& mu : starts) {
    for (const auto& p : stability_trace(model, mu, kTraceLength)) {
      out.require(p.distance <= 2.0 * std::pow(kDelta, double(p.n)), "stability trace above 2*0.7^n");
    }
  }
  out.detail << "observables=100 lemma balls=" << lemma_hits << " traces=" << starts.size();
}

// Verifies every prefix k = 1..K of one tree.
template <class W>
bool telescopes_all_prefixes(const MetricModel& model, const DecompositionConfig& cfg,
                             const DecompositionTree<W>& tree, const W& gate, std::size_t& checks) {
  for (std::size_t k = 1; k <= tree.levels.size(); ++k) {
    DecompositionTree<W> prefix{tree.alpha, {tree.levels.begin(), tree.levels.begin() + std::ptrdiff_t(k)}};
    auto c = cfg;
    c.levels = k;
    ++checks;
    if (!(verify_telescoping(model, c, prefix) <= gate)) return false;
  }
  return true;
}

void telescoping(Outcome& out) {
  constexpr double kEps = 0.05;
  constexpr double kSup = 1.0;
  std::size_t checks = 0;
  auto run = [&](const MetricModel& model, DecompositionConfig cfg, const std::string& label) {
    cfg.levels = choose_k(cfg.alpha, kSup, kEps);
    const auto exact = decompose<Rational>(model, cfg);
    out.require(telescopes_all_prefixes(model, cfg, exact, Rational(0), checks), label + ": rational deviation != 0");
    const auto fl = decompose<double>(model, cfg);
    out.require(telescopes_all_prefixes(model, cfg, fl, kTelescopingTolerance, checks),
                label + ": float deviation above 1e-10");
  };

  const auto doeblin = build_doeblin3();
  DecompositionConfig d;
  d.start = StateId(1);
  d.center = StateId(0);
  d.radius = 0.5;
  d.alpha = default_alpha(doeblin, d.ball());
  run(doeblin, d, "doeblin3");

  const auto ex1 = build_example1(100);
  for (std::size_t m : {1, 2, 5, 10, 20, 40}) {
    DecompositionConfig c;
    c.start = example1_state(m);
    c.center = example1_state(0);
    c.radius = 0.05;
    c.alpha = 0.5;
    run(ex1, c, "example1 x0=1/" + std::to_string(m));
  }

  gen::Rng rng(777);
  for (int t = 0; t < 50; ++t) {
    const auto model = build_doeblin(gen::rational_kernel(rng, 4), gen::line_metric(gen::line_points(rng, 4)),
                                     "random4");
    DecompositionConfig c;
    c.start = StateId(std::size_t(t % 4));
    c.center = StateId(std::size_t((t / 4) % 4));
    c.radius = 0.01;
    c.alpha = default_alpha(model, c.ball());
    run(model, c, "random kernel " + std::to_string(t));
  }
  out.detail << "identities checked=" << checks;
}

void flat_metric(Outcome& out) {
  constexpr double kPairTol = 1e-9;
  constexpr double kGridStep = 1e-3;
  constexpr double kGridTol = 2e-3;
  constexpr double kAxiomTol = 1e-9;
  gen::Rng rng(6006);
  const auto pts = gen::line_points(rng, 40, 0.3);
  const Matrix uniform(pts.size(), std::vector<double>(pts.size(), 1.0 / double(pts.size())));
  const auto model = build_doeblin(uniform, gen::line_metric(pts), "line40");
  std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);

  for (int t = 0; t < 100; ++t) {
    const StateId x(pick(rng)), y(pick(rng));
    const double d = flat_distance(dirac(x), dirac(y), model);
    out.require(std::abs(d - std::min(model.distance(x, y), 2.0)) <= kPairTol, "dirac pair mismatch");
  }

  double worst_grid = 0.0;
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 2 + std::size_t(t % 3);
    const auto local = gen::line_points(rng, n, 1.2);
    const Matrix u(n, std::vector<double>(n, 1.0 / double(n)));
    const auto small = build_doeblin(u, gen::line_metric(local), "small");
    const auto mu = gen::probability(rng, n, n);
    const auto nu = gen::probability(rng, n, 1 + std::size_t(t) % n);
    const auto problem = make_flat_problem(mu, nu, small);
    std::vector<std::vector<double>> d(problem.size(), std::vector<double>(problem.size()));
    for (std::size_t i = 0; i < problem.size(); ++i) {
      for (std::size_t j = 0; j < problem.size(); ++j) d[i][j] = problem.distance(i, j);
    }
    const double grid = oracle::flat_grid_search(problem.coefficients, d, kGridStep);
    const double diff = std::abs(flat_distance(mu, nu, small) - grid);
    worst_grid = std::max(worst_grid, diff);
    out.require(diff <= kGridTol, "LP differs from grid search");
  }

  for (int t = 0; t < 500; ++t) {
    const auto a = gen::probability(rng, pts.size(), 1 + t % 5);
    const auto b = gen::probability(rng, pts.size(), 1 + t % 4);
    const auto c = gen::probability(rng, pts.size(), 1 + t % 3);
    const double ab = flat_distance(a, b, model);
    out.require(ab >= 0.0 && flat_distance(a, a, model) <= kAxiomTol, "identity/positivity violated");
    out.require(std::abs(ab - flat_distance(b, a, model)) <= kAxiomTol, "symmetry violated");
    out.require(flat_distance(a, c, model) <= ab + flat_distance(b, c, model) + kAxiomTol,
                "triangle inequality violated");
  }
  out.detail << "max |LP - grid|=" << format_number(worst_grid);
}

void duality(Outcome& out) {
  constexpr std::size_t kSteps = 200;
  constexpr double kPerStep = 1e-12;
  const std::vector<std::uint32_t> primes{2, 3, 5, 7, 11};
  const std::vector<MetricModel> models{build_example1(150), build_example2(primes), build_doeblin3(),
                                        build_halfmap(40)};
  gen::Rng rng(4242);
  double worst = 0.0;
  for (const auto& model : models) {
    for (int t = 0; t < 5; ++t) {
      const auto f = gen::observable(rng, model);
      const auto mu = gen::probability(rng, model.num_states(), 1 + std::size_t(t) * 7);
      std::vector<Measure> forward{mu};
      for (std::size_t n = 1; n <= kSteps; ++n) forward.push_back(apply(model, forward.back()));
      for_each_dual_iterate(model, f.values(), kSteps, [&](std::size_t n, std::span<const double> g) {
        double lhs = 0.0, rhs = 0.0;
        for (const auto& a : forward[n].atoms()) lhs += f(a.state) * a.weight;
        for (const auto& a : mu.atoms()) rhs += g[a.state.index()] * a.weight;
        const double err = std::abs(lhs - rhs);
        worst = std::max(worst, err / double(n));
        out.require(err <= kPerStep * double(n), model.name() + ": duality violated at n=" + std::to_string(n));
      });
    }
  }
  out.detail << "max error/n=" << format_number(worst);
}

void negative_applicability(Outcome& out) {
  const auto model = build_example1(100);
  const auto f = identity_on_norm(model);
  auto candidates = default_candidate_balls(model);
  for (double r : {0.001, 0.05, 0.5, 2.0}) candidates.emplace_back(example1_state(0), r);
  const auto search = find_lemma_ball(model, f, 0.1, candidates, 200);
  out.require(!search.found.has_value(), "a lemma ball was found");

  DecompositionConfig cfg;
  cfg.start = example1_state(10);
  cfg.center = example1_state(0);
  cfg.radius = 0.05;
  cfg.alpha = 0.5;
  cfg.levels = choose_k(cfg.alpha, f.sup_bound(), 0.05);
  ProbePlan plan{cfg.start, {example1_state(5), example1_state(8)}, 200, 1};
  const auto report = check_contradiction_bound(model, cfg, f, plan, 0.1);
  out.require(!report.applicable, "contradiction check reported applicable");
  out.detail << "candidates=" << candidates.size() << " report=" << (report.applicable ? "APPLICABLE" : "NOT-APPLICABLE");
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "example1 e-property fails at 0", 1.0, example1_eproperty},
      {2, "example1 Cesaro gaps vanish", 5.0, example1_cesaro},
      {3, "example2 Cesaro gap stays above 1/2", 1.0, example2_cesaro},
      {4, "Doeblin positive control", 5.0, doeblin_control},
      {5, "telescoping identity", 10.0, telescoping},
      {6, "flat metric correctness", 30.0, flat_metric},
      {7, "duality of P and U", 5.0, duality},
      {8, "lemma ball absent on example1", 1.0, negative_applicability},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.body(out);
    } catch (const std::exception& e) {
      out.ok = false;
      out.detail << " exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_seconds;
    const bool pass = out.ok && in_time;
    if (!pass) ++failed;
    std::printf("%s  criterion %d  %-38s %7.3fs (budget %.0fs)%s  %s\n", pass ? "PASS" : "FAIL", c.id, c.title, secs,
                c.budget_seconds, in_time ? "" : " over budget", out.detail.str().c_str());
  }
  std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed;
}
