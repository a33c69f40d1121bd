#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "markovlab/ball.hpp"
#include "markovlab/diagnostics.hpp"
#include "markovlab/markov_operator.hpp"
#include "markovlab/measure.hpp"
#include "markovlab/observable.hpp"
#include "markovlab/space.hpp"

namespace markovlab {

/// Parameters of the ball-conditioned splitting of P^n delta_{x0}.
struct DecompositionConfig {
  StateId start;       // x0
  StateId center;      // z
  double radius = 0.0;  // r
  double alpha = 0.0;   // mass share removed at each level, in (0, gamma)
  std::size_t levels = 1;  // k
  std::size_t search_horizon = 1000;
  double epsilon = 0.05;  // target for the k-selection rule

  void validate(const MetricModel& model) const;
  [[nodiscard]] Ball ball() const { return {center, radius}; }
};

/// Smallest k >= 1 with 2 (1 - alpha)^k sup_bound < eps.
std::size_t choose_k(double alpha, double sup_bound, double eps);

/// gamma = mu*(B(z, r)).
double invariant_ball_mass(const MetricModel& model, const Ball& ball);

/// gamma / 2.
double default_alpha(const MetricModel& model, const Ball& ball);

template <class W>
struct DecompositionLevel {
  std::size_t steps = 0;  // n_i
  double radius = 0.0;    // r_i, strictly between realized distances
  BasicMeasure<W> nu;     // conditioned on B(z, r_i)
  BasicMeasure<W> mu;     // residual
};

template <class W>
struct DecompositionTree {
  W alpha;
  std::vector<DecompositionLevel<W>> levels;

  [[nodiscard]] std::size_t total_steps() const {
    std::size_t s = 0;
    for (const auto& l : levels) s += l.steps;
    return s;
  }
};

/// Smallest radius below `radius` whose open ball around `center` carries
/// more than alpha of eta, placed at the midpoint between the realized atom
/// distance that crosses alpha and the next realized distance (capped at
/// `radius`). No atom of eta sits on the resulting sphere.
template <class W>
double select_radius(const MetricModel& model, const BasicMeasure<W>& eta, StateId center,
                     double radius, const W& alpha);

/// Builds levels i = 1..k: n_i is the first n <= search_horizon with
/// (P^n mu_{i-1})(B(z, r)) > alpha, nu_i = P^{n_i} mu_{i-1} conditioned on
/// B(z, r_i), mu_i the residual. mu_0 = delta_{x0}.
///
/// Throws ArgumentError unless 0 < alpha < gamma, and SearchHorizonError
/// (carrying the failing level) when no n within the horizon qualifies.
template <class W>
DecompositionTree<W> decompose(const MetricModel& model, const DecompositionConfig& cfg);

/// max atomwise |P^{n_1+...+n_k} delta_{x0} - RHS| with
/// RHS = sum_i alpha (1-alpha)^{i-1} P^{n_{i+1}+...+n_k} nu_i + (1-alpha)^k mu_k.
template <class W>
W verify_telescoping(const MetricModel& model, const DecompositionConfig& cfg,
                     const DecompositionTree<W>& tree);

/// Float-mode gate for verify_telescoping.
inline constexpr double kTelescopingTolerance = 1e-10;

struct ContinuityRow {
  StateId probe;
  double probe_distance = 0.0;  // d(x, x0)
  std::size_t level = 0;
  double iterate_distance = 0.0;  // flat(P^{n_i} mu_{i-1}^x, P^{n_i} mu_{i-1}^{x0})
  std::optional<double> nu_distance;
  std::optional<double> mu_distance;
  bool close_enough = false;  // (P^{n_i} mu_{i-1}^x)(B(z, r_i)) > alpha
};

/// Rebuilds each level for every probe reusing the (n_i, r_i) of the x0 tree.
/// A probe whose mass drops to alpha or below at some level is flagged and
/// not continued past that level.
std::vector<ContinuityRow> continuity_scan(const MetricModel& model,
                                           const DecompositionConfig& cfg,
                                           const DecompositionTree<double>& tree,
                                           const std::vector<StateId>& probes);

/// eps_ball (alpha + alpha(1-alpha) + ... + alpha(1-alpha)^{k-1}) + 2 (1-alpha)^k |f|.
double oscillation_bound(double alpha, std::size_t k, double sup_bound, double eps_ball);
double oscillation_bound(const DecompositionConfig& cfg, const Observable& f, double eps_ball);

enum class ProbeStatus { pass, fail, not_close_enough, no_window };

struct ContradictionRow {
  StateId probe;
  double probe_distance = 0.0;
  ProbeStatus status = ProbeStatus::no_window;
  std::size_t window_start = 0;
  double measured_gap = 0.0;
  double bound = 0.0;
  double slack = 0.0;
};

struct ContradictionReport {
  bool applicable = false;
  std::vector<std::string> notes;
  std::optional<LemmaBall> lemma;
  double bound = 0.0;
  std::vector<ContradictionRow> rows;

  /// Applicable and no probe FAILs.
  [[nodiscard]] bool passed() const;
};

/// Compares max_{n in window} |U^n f(x) - U^n f(x0)| with oscillation_bound
/// for each close-enough probe. Requires a lemma ball of radius 2r around z;
/// without one the report is NOT-APPLICABLE. plan.target must be cfg.start.
ContradictionReport check_contradiction_bound(const MetricModel& model,
                                              const DecompositionConfig& cfg,
                                              const Observable& f, const ProbePlan& plan,
                                              double lemma_eps);

std::string to_string(ProbeStatus status);

template <class W>
nlohmann::json tree_to_json(const DecompositionTree<W>& tree);

}  // namespace markovlab
