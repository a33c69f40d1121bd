#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "markovlab/ball.hpp"
#include "markovlab/measure.hpp"
#include "markovlab/observable.hpp"
#include "markovlab/space.hpp"

namespace markovlab {

/// Default verdict tolerance for "gap has vanished".
inline constexpr double kVerdictTolerance = 1e-6;

/// Probe ladder approaching `target` together with the tail window [tail_start, horizon].
struct ProbePlan {
  StateId target;
  std::vector<StateId> probes;  // strictly decreasing distance to target
  std::size_t horizon = 1;
  std::size_t tail_start = 1;

  /// Throws ArgumentError on unknown ids, a non-decreasing ladder or a bad window.
  void validate(const MetricModel& model) const;
};

/// Every other state, farthest first, keeping one state per distinct distance.
ProbePlan default_probe_plan(const MetricModel& model, StateId target, std::size_t horizon,
                             std::size_t tail_start);

enum class VerdictKind { fails, holds_at_horizon, inconclusive };

struct Verdict {
  VerdictKind kind = VerdictKind::inconclusive;
  double level = 0.0;  // g for FAILS(g)

  [[nodiscard]] std::string to_string() const;
};

struct ReportRow {
  StateId probe;
  double distance = 0.0;
  double gap = 0.0;
};

struct DiagnosticReport {
  std::string profile;
  StateId target;
  std::vector<ReportRow> rows;  // decreasing probe distance
  Verdict verdict;
  std::size_t horizon = 0;
  std::size_t tail_start = 0;
  double tolerance = kVerdictTolerance;
};

/// Verdict over the closer half of the ladder: HOLDS-AT-HORIZON if every gap
/// there is <= tol, FAILS(g) if every gap there is > tol (g = their minimum),
/// INCONCLUSIVE otherwise.
Verdict classify(const std::vector<ReportRow>& rows, double tol);

/// gap(x) = max_{tail_start <= n <= horizon} |U^n f(x) - U^n f(z)|.
DiagnosticReport eproperty_profile(const MetricModel& model, const Observable& f,
                                   const ProbePlan& plan, double tol = kVerdictTolerance);

/// Same with the Cesaro averages A_n f = (1/n) sum_{k<=n} U^k f.
DiagnosticReport cesaro_profile(const MetricModel& model, const Observable& f,
                                const ProbePlan& plan, double tol = kVerdictTolerance);

struct StabilityPoint {
  std::size_t n = 0;
  double distance = 0.0;
};

/// (n, flat_distance(P^n mu, mu*)) for n = 0..n_max.
std::vector<StabilityPoint> stability_trace(const MetricModel& model, const Measure& mu,
                                            std::size_t n_max);

/// min_{n_lo <= n <= n_hi} (P^n mu)(B): finite-window proxy of the liminf.
double liminf_ball_mass(const MetricModel& model, const Measure& mu, const Ball& ball,
                        std::size_t n_lo, std::size_t n_hi);

/// B is inside supp mu*: every state of B carries mass and B holds no
/// accumulation point of the untruncated space.
bool ball_inside_support(const MetricModel& model, const Ball& ball, const Measure& invariant);

/// Balls centered at invariant atoms with midpoint radii.
std::vector<Ball> default_candidate_balls(const MetricModel& model);

struct LemmaBall {
  Ball ball;
  std::size_t start = 1;     // N
  double oscillation = 0.0;  // realized max_{x,y in B, N<=n<=N_max} |U^n f(x) - U^n f(y)|
};

struct LemmaBallSearch {
  std::optional<LemmaBall> found;
  std::vector<std::string> notes;
};

/// First candidate inside supp mu* admitting the smallest N <= n_max with
/// oscillation of U^n f over the ball at most eps for all N <= n <= n_max.
LemmaBallSearch find_lemma_ball(const MetricModel& model, const Observable& f, double eps,
                                const std::vector<Ball>& candidates, std::size_t n_max);

std::string to_string(VerdictKind kind);
std::string report_to_csv(const DiagnosticReport& report);
nlohmann::json report_to_json(const DiagnosticReport& report, const MetricModel& model);
std::string stability_to_csv(const std::vector<StabilityPoint>& trace);

/// Locale-independent, 12 significant digits.
std::string format_number(double v);

}  // namespace markovlab
