#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "markovlab/measure.hpp"
#include "markovlab/types.hpp"

namespace markovlab {

enum class MetricKind {
  explicit_matrix,  ///< full distance matrix
  coords_linf,      ///< sup-norm of coordinate vectors
  real_abs,         ///< |x - y| on one real coordinate
  prime_levels,     ///< symbolic l^inf on singleton sequences (prime, level)
};

std::string to_string(MetricKind kind);

struct StateDescriptor {
  std::string label;
  std::vector<double> coords;
  // prime_levels only: level 0 is the shared zero state.
  std::uint32_t prime = 0;
  std::uint32_t level = 0;
};

/// Open ball: membership is distance(x, center) < radius.
struct Ball {
  StateId center;
  double radius = 0.0;

  Ball() = default;
  Ball(StateId c, double r);
};

/// A finite metric state space with a transition kernel. Immutable after
/// construction; the constructor validates every invariant and throws
/// LoadError naming the offending state or row.
class MetricModel {
 public:
  struct Spec {
    std::string name;
    std::vector<StateDescriptor> states;
    MetricKind metric = MetricKind::explicit_matrix;
    std::vector<double> distance_matrix;  // row-major n*n, explicit_matrix only
    std::vector<ExactMeasure> kernel;      // one probability row per state
    std::optional<Measure> invariant;
    StateId origin{};                      // reference point for state norms
    // States that are limits of the untruncated family; no ball around
    // them fits inside a finite support.
    std::vector<StateId> accumulation_points;
  };

  explicit MetricModel(Spec spec);

  [[nodiscard]] const std::string& name() const noexcept { return name_; }
  [[nodiscard]] std::size_t num_states() const noexcept { return states_.size(); }
  [[nodiscard]] const StateDescriptor& state(StateId s) const;
  [[nodiscard]] MetricKind metric_kind() const noexcept { return metric_; }

  /// Exact metric value; throws ArgumentError on invalid ids.
  [[nodiscard]] double distance(StateId a, StateId b) const;

  [[nodiscard]] const Measure& kernel_row(StateId s) const;
  [[nodiscard]] const ExactMeasure& exact_kernel_row(StateId s) const;

  template <class W>
  [[nodiscard]] const BasicMeasure<W>& row(StateId s) const {
    if constexpr (WeightTraits<W>::exact) {
      return exact_kernel_row(s);
    } else {
      return kernel_row(s);
    }
  }

  [[nodiscard]] const std::optional<Measure>& invariant_measure() const noexcept {
    return invariant_;
  }

  [[nodiscard]] StateId origin() const noexcept { return origin_; }
  /// distance(s, origin()).
  [[nodiscard]] double norm(StateId s) const { return distance(s, origin_); }

  [[nodiscard]] bool is_accumulation_point(StateId s) const;
  [[nodiscard]] const std::vector<StateId>& accumulation_points() const noexcept {
    return accumulation_points_;
  }

  /// Every kernel row is a single atom.
  [[nodiscard]] bool is_deterministic() const noexcept { return deterministic_; }
  /// Successor under a deterministic kernel.
  [[nodiscard]] StateId successor(StateId s) const;

  [[nodiscard]] std::optional<StateId> find_label(std::string_view label) const;

  void check_id(StateId s) const;

  /// Row-major distance table over all states.
  [[nodiscard]] std::vector<double> distance_table() const;

 private:
  void validate_metric() const;
  void validate_kernel() const;
  void validate_invariant() const;

  std::string name_;
  std::vector<StateDescriptor> states_;
  MetricKind metric_;
  std::vector<double> matrix_;
  std::vector<ExactMeasure> exact_kernel_;
  std::vector<Measure> kernel_;
  std::optional<Measure> invariant_;
  StateId origin_;
  std::vector<StateId> accumulation_points_;
  bool deterministic_ = false;
};

/// States {0} u {1/m : 1 <= m <= m_max}; T(0) = T(1) = 0, T(1/m) = 1/(m-1).
/// State id 0 is the point 0 and id m is the point 1/m.
MetricModel build_example1(std::size_t m_max);
StateId example1_state(std::size_t m);

/// Singleton sequences (n, i) = i/k_n placed at position k_n^i - 1 in l^inf,
/// with every (n, 0) identified as the zero state (id 0). Levels are
/// stored symbolically; positions are never materialized.
MetricModel build_example2(std::span<const std::uint32_t> primes);
/// Id of (prime, level) in a model built from `primes`; level 0 is zero.
StateId example2_state(std::span<const std::uint32_t> primes, std::uint32_t prime,
                       std::uint32_t level);

/// Control model T(x) = x/2 on {2^-j : 0 <= j <= depth} u {0}; the last
/// dyadic point maps to 0. Id 0 is the point 0, id j+1 is 2^-j.
MetricModel build_halfmap(std::size_t depth);

using Matrix = std::vector<std::vector<double>>;
using ExactMatrix = std::vector<std::vector<Rational>>;

/// Finite chain from a row-stochastic matrix and an explicit metric; the
/// invariant measure is solved from mu P = mu with sum(mu) = 1.
MetricModel build_doeblin(const Matrix& transition, const Matrix& metric,
                          std::string name = "doeblin");
MetricModel build_doeblin(const ExactMatrix& transition, const Matrix& metric,
                          std::string name = "doeblin");

/// The 3-state control: 0.8 on the diagonal, 0.1 elsewhere, states at 0, 1, 3
/// on the real line.
MetricModel build_doeblin3();

/// Solves mu P = mu, sum(mu) = 1. Throws DomainError if the solution is not unique.
std::vector<double> solve_stationary(const Matrix& transition);

bool is_prime(std::uint64_t n);

}  // namespace markovlab
