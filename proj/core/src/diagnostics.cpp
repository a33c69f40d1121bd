#include "markovlab/diagnostics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "markovlab/error.hpp"
#include "markovlab/flat_metric.hpp"
#include "markovlab/markov_operator.hpp"

namespace markovlab {

void ProbePlan::validate(const MetricModel& model) const {
  model.check_id(target);
  if (horizon < 1) throw ArgumentError("horizon must be at least 1");
  if (tail_start < 1 || tail_start > horizon) {
    throw ArgumentError("tail start must satisfy 1 <= tail_start <= horizon");
  }
  double last = std::numeric_limits<double>::infinity();
  for (auto p : probes) {
    model.check_id(p);
    const double d = model.distance(p, target);
    if (!(d < last)) {
      throw ArgumentError("probe distances to the target must strictly decrease (state " +
                          std::to_string(p.value) + ")");
    }
    last = d;
  }
}

ProbePlan default_probe_plan(const MetricModel& model, StateId target, std::size_t horizon,
                             std::size_t tail_start) {
  model.check_id(target);
  std::vector<std::pair<double, StateId>> others;
  for (std::size_t i = 0; i < model.num_states(); ++i) {
    if (StateId(i) != target) others.emplace_back(model.distance(StateId(i), target), StateId(i));
  }
  std::sort(others.begin(), others.end(), [](const auto& l, const auto& r) {
    return l.first != r.first ? l.first > r.first : l.second < r.second;
  });
  ProbePlan plan{target, {}, horizon, tail_start};
  double last = std::numeric_limits<double>::infinity();
  for (const auto& [d, s] : others) {
    if (d < last) {
      plan.probes.push_back(s);
      last = d;
    }
  }
  return plan;
}

std::string to_string(VerdictKind kind) {
  switch (kind) {
    case VerdictKind::fails: return "FAILS";
    case VerdictKind::holds_at_horizon: return "HOLDS-AT-HORIZON";
    case VerdictKind::inconclusive: return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

std::string Verdict::to_string() const {
  if (kind == VerdictKind::fails) return "FAILS(" + format_number(level) + ")";
  return markovlab::to_string(kind);
}

Verdict classify(const std::vector<ReportRow>& rows, double tol) {
  if (rows.empty()) return {};
  const auto tail = std::span(rows).subspan(rows.size() / 2);
  const bool all_small = std::all_of(tail.begin(), tail.end(), [&](const ReportRow& r) { return r.gap <= tol; });
  if (all_small) return {VerdictKind::holds_at_horizon, 0.0};
  const bool all_large = std::all_of(tail.begin(), tail.end(), [&](const ReportRow& r) { return r.gap > tol; });
  if (all_large) {
    double g = std::numeric_limits<double>::infinity();
    for (const auto& r : tail) g = std::min(g, r.gap);
    return {VerdictKind::fails, g};
  }
  return {};
}

namespace {

void check_inputs(const MetricModel& model, const Observable& f, const ProbePlan& plan, double tol) {
  plan.validate(model);
  if (f.size() != model.num_states()) throw ArgumentError("observable size does not match the model");
  if (!(tol > 0.0)) throw ArgumentError("verdict tolerance must be positive");
}

DiagnosticReport make_report(std::string profile, const MetricModel& model, const ProbePlan& plan,
                             std::vector<double> gaps, double tol) {
  DiagnosticReport report;
  report.profile = std::move(profile);
  report.target = plan.target;
  report.horizon = plan.horizon;
  report.tail_start = plan.tail_start;
  report.tolerance = tol;
  for (std::size_t k = 0; k < plan.probes.size(); ++k) {
    report.rows.push_back({plan.probes[k], model.distance(plan.probes[k], plan.target), gaps[k]});
  }
  report.verdict = classify(report.rows, tol);
  return report;
}

}  // namespace

DiagnosticReport eproperty_profile(const MetricModel& model, const Observable& f, const ProbePlan& plan,
                                   double tol) {
  check_inputs(model, f, plan, tol);
  std::vector<double> gaps(plan.probes.size(), 0.0);
  const std::size_t z = plan.target.index();
  for_each_dual_iterate(model, f.values(), plan.horizon, [&](std::size_t n, std::span<const double> g) {
    if (n < plan.tail_start) return;
    for (std::size_t k = 0; k < plan.probes.size(); ++k) {
      gaps[k] = std::max(gaps[k], std::abs(g[plan.probes[k].index()] - g[z]));
    }
  });
  return make_report("eproperty", model, plan, std::move(gaps), tol);
}

DiagnosticReport cesaro_profile(const MetricModel& model, const Observable& f, const ProbePlan& plan,
                                double tol) {
  check_inputs(model, f, plan, tol);
  std::vector<double> gaps(plan.probes.size(), 0.0);
  std::vector<double> sum(model.num_states(), 0.0);
  const std::size_t z = plan.target.index();
  for_each_dual_iterate(model, f.values(), plan.horizon, [&](std::size_t n, std::span<const double> g) {
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += g[i];
    if (n < plan.tail_start) return;
    const double inv = 1.0 / double(n);
    for (std::size_t k = 0; k < plan.probes.size(); ++k) {
      gaps[k] = std::max(gaps[k], std::abs(sum[plan.probes[k].index()] * inv - sum[z] * inv));
    }
  });
  return make_report("cesaro", model, plan, std::move(gaps), tol);
}

std::vector<StabilityPoint> stability_trace(const MetricModel& model, const Measure& mu, std::size_t n_max) {
  const auto& inv = model.invariant_measure();
  if (!inv) throw ArgumentError("stability_trace: model has no invariant measure");
  for (const auto& a : mu.atoms()) model.check_id(a.state);
  std::vector<StabilityPoint> out;
  out.reserve(n_max + 1);
  Measure current = mu;
  for (std::size_t n = 0; n <= n_max; ++n) {
    if (n > 0) current = apply(model, current);
    out.push_back({n, flat_distance(current, *inv, model)});
  }
  return out;
}

double liminf_ball_mass(const MetricModel& model, const Measure& mu, const Ball& ball, std::size_t n_lo,
                        std::size_t n_hi) {
  if (n_lo > n_hi) throw ArgumentError("liminf_ball_mass: n_lo must not exceed n_hi");
  model.check_id(ball.center);
  Measure current = iterate(model, mu, n_lo);
  double lowest = ball_mass(current, ball, model);
  for (std::size_t n = n_lo + 1; n <= n_hi; ++n) {
    current = apply(model, current);
    lowest = std::min(lowest, ball_mass(current, ball, model));
  }
  return lowest;
}

bool ball_inside_support(const MetricModel& model, const Ball& ball, const Measure& invariant) {
  for (auto s : ball_states(model, ball)) {
    if (model.is_accumulation_point(s)) return false;
    if (!(invariant.weight(s) > 0.0)) return false;
  }
  return true;
}

std::vector<Ball> default_candidate_balls(const MetricModel& model) {
  const auto& inv = model.invariant_measure();
  if (!inv) throw ArgumentError("default_candidate_balls: model has no invariant measure");
  std::vector<Ball> out;
  for (const auto& a : inv->atoms()) {
    auto balls = midpoint_balls(model, a.state);
    out.insert(out.end(), balls.begin(), balls.end());
  }
  return out;
}

LemmaBallSearch find_lemma_ball(const MetricModel& model, const Observable& f, double eps,
                                const std::vector<Ball>& candidates, std::size_t n_max) {
  const auto& inv = model.invariant_measure();
  if (!inv) throw ArgumentError("find_lemma_ball: model has no invariant measure");
  if (!(eps > 0.0)) throw ArgumentError("find_lemma_ball: eps must be positive");
  if (n_max < 1) throw ArgumentError("find_lemma_ball: horizon must be at least 1");
  if (f.size() != model.num_states()) throw ArgumentError("observable size does not match the model");

  LemmaBallSearch result;
  struct Admissible {
    Ball ball;
    std::vector<StateId> states;
    std::vector<double> osc;  // osc[n-1] over the ball of U^n f
  };
  std::vector<Admissible> admissible;
  for (const auto& b : candidates) {
    model.check_id(b.center);
    if (!ball_inside_support(model, b, *inv)) {
      result.notes.push_back("ball B(" + std::to_string(b.center.value) + ", " + format_number(b.radius) +
                             ") skipped: not inside supp mu*");
      continue;
    }
    admissible.push_back({b, ball_states(model, b), {}});
  }
  if (admissible.empty()) return result;

  for_each_dual_iterate(model, f.values(), n_max, [&](std::size_t, std::span<const double> g) {
    for (auto& c : admissible) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (auto s : c.states) {
        lo = std::min(lo, g[s.index()]);
        hi = std::max(hi, g[s.index()]);
      }
      c.osc.push_back(c.states.empty() ? 0.0 : hi - lo);
    }
  });

  for (const auto& c : admissible) {
    // suffix maxima: tail[N-1] = max_{N <= n <= n_max} osc
    std::vector<double> tail(c.osc.size());
    double running = 0.0;
    for (std::size_t k = c.osc.size(); k-- > 0;) {
      running = std::max(running, c.osc[k]);
      tail[k] = running;
    }
    for (std::size_t k = 0; k < tail.size(); ++k) {
      if (tail[k] <= eps) {
        result.found = LemmaBall{c.ball, k + 1, tail[k]};
        return result;
      }
    }
    result.notes.push_back("ball B(" + std::to_string(c.ball.center.value) + ", " +
                           format_number(c.ball.radius) + "): oscillation stays above eps up to the horizon");
  }
  return result;
}

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
  if (ec != std::errc()) return "nan";
  return std::string(buf, end);
}

std::string report_to_csv(const DiagnosticReport& report) {
  std::string out = "probe_id,distance,gap\n";
  for (const auto& r : report.rows) {
    out += std::to_string(r.probe.value) + ',' + format_number(r.distance) + ',' + format_number(r.gap) + '\n';
  }
  return out;
}

nlohmann::json report_to_json(const DiagnosticReport& report, const MetricModel& model) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"probe_id", r.probe.value},
                    {"label", model.state(r.probe).label},
                    {"distance", r.distance},
                    {"gap", r.gap}});
  }
  return {{"model", model.name()},
          {"profile", report.profile},
          {"target", report.target.value},
          {"horizon", report.horizon},
          {"tail_start", report.tail_start},
          {"tolerance", report.tolerance},
          {"verdict", {{"kind", to_string(report.verdict.kind)},
                       {"level", report.verdict.level},
                       {"text", report.verdict.to_string()}}},
          {"rows", std::move(rows)}};
}

std::string stability_to_csv(const std::vector<StabilityPoint>& trace) {
  std::string out = "n,distance\n";
  for (const auto& p : trace) out += std::to_string(p.n) + ',' + format_number(p.distance) + '\n';
  return out;
}

}  // namespace markovlab
