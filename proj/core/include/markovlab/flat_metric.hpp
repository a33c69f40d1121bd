#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "markovlab/measure.hpp"
#include "markovlab/space.hpp"

namespace markovlab {

/// maximize sum c_i f_i  s.t.  |f_i| <= 1,  f_i - f_j <= d_ij.
struct FlatMetricProblem {
  std::vector<StateId> points;       // union support, for diagnostics only
  std::vector<double> coefficients;  // c = mu - nu per point
  std::vector<double> distances;     // row-major n*n

  [[nodiscard]] std::size_t size() const noexcept { return coefficients.size(); }
  [[nodiscard]] double distance(std::size_t i, std::size_t j) const {
    return distances[i * size() + j];
  }
  [[nodiscard]] std::string dump() const;
};

struct LpSolution {
  double value = 0.0;
  std::vector<double> potential;  // optimal f
  std::size_t pivots = 0;
};

/// Dense simplex with Bland's rule. Lipschitz rows with d_ij >= 2 or implied
/// by a shorter two-hop path are pruned. Throws InternalError (with a problem
/// dump) if the pivot guard is exceeded.
LpSolution solve_lp(const FlatMetricProblem& problem);

FlatMetricProblem make_flat_problem(const Measure& mu, const Measure& nu,
                                    const MetricModel& model);

/// Fortet-Mourier (bounded-Lipschitz) distance
/// sup { |<f, mu - nu>| : |f| <= 1, Lip f <= 1 }.
double flat_distance(const Measure& mu, const Measure& nu, const MetricModel& model);

}  // namespace markovlab
