#include "markovlab/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "markovlab/error.hpp"
#include "markovlab/flat_metric.hpp"
#include "markovlab/model_io.hpp"

namespace markovlab {

void DecompositionConfig::validate(const MetricModel& model) const {
  model.check_id(start);
  model.check_id(center);
  if (!(radius > 0.0) || !std::isfinite(radius)) throw ArgumentError("decomposition radius must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
  if (levels < 1) throw ArgumentError("number of levels k must be at least 1");
  if (search_horizon < 1) throw ArgumentError("search horizon must be at least 1");
  if (!(epsilon > 0.0)) throw ArgumentError("epsilon must be positive");
  if (!model.invariant_measure()) throw ArgumentError("decomposition needs an invariant measure");
}

std::size_t choose_k(double alpha, double sup_bound, double eps) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("choose_k: alpha must lie in (0, 1)");
  if (!(eps > 0.0)) throw ArgumentError("choose_k: eps must be positive");
  auto holds = [&](std::size_t k) {
    return 2.0 * std::pow(1.0 - alpha, double(k)) * sup_bound < eps;
  };
  if (holds(1)) return 1;
  // Start near the closed-form answer and walk to the smallest k.
  const double estimate = std::log(eps / (2.0 * sup_bound)) / std::log1p(-alpha);
  std::size_t k = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(estimate)));
  while (k > 1 && holds(k - 1)) --k;
  while (!holds(k)) ++k;
  return k;
}

double invariant_ball_mass(const MetricModel& model, const Ball& ball) {
  const auto& inv = model.invariant_measure();
  if (!inv) throw ArgumentError("model has no invariant measure");
  return ball_mass(*inv, ball, model);
}

double default_alpha(const MetricModel& model, const Ball& ball) {
  return 0.5 * invariant_ball_mass(model, ball);
}

template <class W>
double select_radius(const MetricModel& model, const BasicMeasure<W>& eta, StateId center, double radius,
                     const W& alpha) {
  std::vector<std::pair<double, const W*>> atoms;
  for (const auto& a : eta.atoms()) atoms.emplace_back(model.distance(a.state, center), &a.weight);
  std::sort(atoms.begin(), atoms.end(), [](const auto& l, const auto& r) { return l.first < r.first; });

  W cumulative(0);
  std::size_t k = 0;
  while (k < atoms.size() && atoms[k].first < radius) {
    const double d = atoms[k].first;
    while (k < atoms.size() && atoms[k].first == d) cumulative += *atoms[k++].second;
    if (cumulative > alpha) {
      const double next = k < atoms.size() ? std::min(atoms[k].first, radius) : radius;
      return 0.5 * (d + next);
    }
  }
  throw DomainError("select_radius: ball mass does not exceed alpha");
}

template <class W>
DecompositionTree<W> decompose(const MetricModel& model, const DecompositionConfig& cfg) {
  cfg.validate(model);
  const Ball ball = cfg.ball();
  const double gamma = invariant_ball_mass(model, ball);
  if (!(cfg.alpha < gamma)) {
    throw ArgumentError("alpha = " + format_number(cfg.alpha) +
                        " must lie in (0, gamma) with gamma = mu*(B(z, r)) = " + format_number(gamma));
  }
  const std::size_t lo = cfg.search_horizon / 2;
  const double window_mass = liminf_ball_mass(model, dirac(cfg.start), ball, lo, cfg.search_horizon);
  if (!(window_mass > cfg.alpha)) {
    throw ArgumentError("alpha = " + format_number(cfg.alpha) + " is not below min_{" + std::to_string(lo) +
                        " <= n <= " + std::to_string(cfg.search_horizon) +
                        "} (P^n delta_x0)(B(z, r)) = " + format_number(window_mass));
  }

  DecompositionTree<W> tree{WeightTraits<W>::from_double(cfg.alpha), {}};
  BasicMeasure<W> previous = dirac<W>(cfg.start);
  for (std::size_t level = 1; level <= cfg.levels; ++level) {
    BasicMeasure<W> eta = previous;
    std::size_t steps = 0;
    for (std::size_t n = 1; n <= cfg.search_horizon; ++n) {
      eta = apply(model, eta);
      if (ball_mass(eta, ball, model) > tree.alpha) {
        steps = n;
        break;
      }
    }
    if (steps == 0) {
      throw SearchHorizonError("level " + std::to_string(level) + ": no n <= " +
                                   std::to_string(cfg.search_horizon) + " puts more than alpha mass in B(z, r)",
                               level);
    }
    const double r_i = select_radius(model, eta, cfg.center, cfg.radius, tree.alpha);
    auto nu = restrict_normalize(eta, Ball(cfg.center, r_i), model);
    auto mu = residual(eta, tree.alpha, nu);
    tree.levels.push_back({steps, r_i, std::move(nu), mu});
    previous = std::move(mu);
  }
  return tree;
}

template <class W>
W verify_telescoping(const MetricModel& model, const DecompositionConfig& cfg, const DecompositionTree<W>& tree) {
  const std::size_t k = tree.levels.size();
  if (k == 0) throw ArgumentError("verify_telescoping: empty tree");
  const W& alpha = tree.alpha;
  const W keep = W(1) - alpha;

  const BasicMeasure<W> lhs = iterate(model, dirac<W>(cfg.start), tree.total_steps());

  std::vector<Term<W>> terms;
  W share(1);  // (1-alpha)^{i-1}
  std::size_t remaining = tree.total_steps();
  for (std::size_t i = 0; i < k; ++i) {
    remaining -= tree.levels[i].steps;
    terms.push_back({alpha * share, iterate(model, tree.levels[i].nu, remaining)});
    share *= keep;
  }
  terms.push_back({share, tree.levels.back().mu});
  return max_deviation(lhs, combine(std::span<const Term<W>>(terms)));
}

std::vector<ContinuityRow> continuity_scan(const MetricModel& model, const DecompositionConfig& cfg,
                                           const DecompositionTree<double>& tree,
                                           const std::vector<StateId>& probes) {
  const double alpha = tree.alpha;
  std::vector<Measure> base_eta;
  {
    Measure previous = dirac(cfg.start);
    for (const auto& level : tree.levels) {
      base_eta.push_back(iterate(model, previous, level.steps));
      previous = level.mu;
    }
  }

  std::vector<ContinuityRow> rows;
  for (auto x : probes) {
    model.check_id(x);
    const double dx = model.distance(x, cfg.start);
    Measure previous = dirac(x);
    for (std::size_t i = 0; i < tree.levels.size(); ++i) {
      const auto& level = tree.levels[i];
      const Ball inner(cfg.center, level.radius);
      Measure eta = iterate(model, previous, level.steps);
      ContinuityRow row{x, dx, i + 1, flat_distance(eta, base_eta[i], model), std::nullopt, std::nullopt, false};
      row.close_enough = ball_mass(eta, inner, model) > alpha;
      if (row.close_enough) {
        auto nu = restrict_normalize(eta, inner, model);
        auto mu = residual(eta, alpha, nu);
        row.nu_distance = flat_distance(nu, level.nu, model);
        row.mu_distance = flat_distance(mu, level.mu, model);
        previous = std::move(mu);
      }
      rows.push_back(row);
      if (!row.close_enough) break;
    }
  }
  return rows;
}

double oscillation_bound(double alpha, std::size_t k, double sup_bound, double eps_ball) {
  double geometric = 0.0;
  double weight = alpha;
  for (std::size_t i = 0; i < k; ++i) {
    geometric += weight;
    weight *= 1.0 - alpha;
  }
  return eps_ball * geometric + 2.0 * std::pow(1.0 - alpha, double(k)) * sup_bound;
}

double oscillation_bound(const DecompositionConfig& cfg, const Observable& f, double eps_ball) {
  return oscillation_bound(cfg.alpha, cfg.levels, f.sup_bound(), eps_ball);
}

std::string to_string(ProbeStatus status) {
  switch (status) {
    case ProbeStatus::pass: return "PASS";
    case ProbeStatus::fail: return "FAIL";
    case ProbeStatus::not_close_enough: return "NOT-CLOSE-ENOUGH";
    case ProbeStatus::no_window: return "NO-WINDOW";
  }
  return "NO-WINDOW";
}

bool ContradictionReport::passed() const {
  return applicable && std::none_of(rows.begin(), rows.end(),
                                    [](const ContradictionRow& r) { return r.status == ProbeStatus::fail; });
}

ContradictionReport check_contradiction_bound(const MetricModel& model, const DecompositionConfig& cfg,
                                              const Observable& f, const ProbePlan& plan, double lemma_eps) {
  plan.validate(model);
  if (plan.target != cfg.start) throw ArgumentError("probe plan must approach the decomposition start x0");
  ContradictionReport report;

  const Ball lemma_candidate(cfg.center, 2.0 * cfg.radius);
  auto search = find_lemma_ball(model, f, lemma_eps, {lemma_candidate}, plan.horizon);
  report.notes = std::move(search.notes);
  if (!search.found) {
    report.notes.push_back("NOT-APPLICABLE: no ball B(z, 2r) inside supp mu* with controlled oscillation");
    return report;
  }
  report.applicable = true;
  report.lemma = search.found;

  const auto tree = decompose<double>(model, cfg);
  const auto scan = continuity_scan(model, cfg, tree, plan.probes);
  const double alpha = cfg.alpha;
  const std::size_t k = tree.levels.size();
  report.bound = oscillation_bound(alpha, k, f.sup_bound(), report.lemma->oscillation);

  const std::size_t window_start = std::max(plan.tail_start, tree.total_steps() + report.lemma->start);
  std::vector<double> gaps(plan.probes.size(), 0.0);
  const std::size_t x0 = cfg.start.index();
  for_each_dual_iterate(model, f.values(), plan.horizon, [&](std::size_t n, std::span<const double> g) {
    if (n < window_start) return;
    for (std::size_t p = 0; p < plan.probes.size(); ++p) {
      gaps[p] = std::max(gaps[p], std::abs(g[plan.probes[p].index()] - g[x0]));
    }
  });

  for (std::size_t p = 0; p < plan.probes.size(); ++p) {
    const StateId x = plan.probes[p];
    ContradictionRow row{x, model.distance(x, cfg.start), ProbeStatus::no_window, window_start, gaps[p],
                         report.bound, 0.0};
    std::vector<const ContinuityRow*> levels;
    for (const auto& r : scan) {
      if (r.probe == x) levels.push_back(&r);
    }
    const bool close = levels.size() == k && levels.back()->close_enough;
    if (!close) {
      row.status = ProbeStatus::not_close_enough;
    } else if (window_start <= plan.horizon) {
      double weighted = 0.0;
      double weight = alpha;
      for (const auto* r : levels) {
        weighted += weight * r->nu_distance.value_or(0.0);
        weight *= 1.0 - alpha;
      }
      weighted += std::pow(1.0 - alpha, double(k)) * levels.back()->mu_distance.value_or(0.0);
      row.slack = 2.0 * f.sup_bound() * weighted;
      row.status = row.measured_gap <= row.bound + row.slack + kMassTolerance ? ProbeStatus::pass
                                                                               : ProbeStatus::fail;
    }
    report.rows.push_back(row);
  }
  return report;
}

template <class W>
nlohmann::json tree_to_json(const DecompositionTree<W>& tree) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& l : tree.levels) {
    levels.push_back({{"n", l.steps}, {"r", l.radius}, {"nu", measure_to_json(l.nu)}, {"mu", measure_to_json(l.mu)}});
  }
  nlohmann::json out = {{"alpha", WeightTraits<W>::to_double(tree.alpha)}, {"levels", std::move(levels)}};
  if constexpr (WeightTraits<W>::exact) out["alpha_exact"] = tree.alpha.str();
  return out;
}

template double select_radius<double>(const MetricModel&, const Measure&, StateId, double, const double&);
template double select_radius<Rational>(const MetricModel&, const ExactMeasure&, StateId, double,
                                        const Rational&);
template DecompositionTree<double> decompose<double>(const MetricModel&, const DecompositionConfig&);
template DecompositionTree<Rational> decompose<Rational>(const MetricModel&, const DecompositionConfig&);
template double verify_telescoping<double>(const MetricModel&, const DecompositionConfig&,
                                           const DecompositionTree<double>&);
template Rational verify_telescoping<Rational>(const MetricModel&, const DecompositionConfig&,
                                               const DecompositionTree<Rational>&);
template nlohmann::json tree_to_json<double>(const DecompositionTree<double>&);
template nlohmann::json tree_to_json<Rational>(const DecompositionTree<Rational>&);

}  // namespace markovlab
