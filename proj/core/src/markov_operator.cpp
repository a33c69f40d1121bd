#include "markovlab/markov_operator.hpp"

#include <algorithm>

#include "markovlab/error.hpp"

namespace markovlab {

std::vector<double> dual_apply_values(const MetricModel& model, std::span<const double> g) {
  const std::size_t n = model.num_states();
  if (g.size() != n) throw ArgumentError("dual_apply: function size does not match the model");
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (const auto& a : model.kernel_row(StateId(i)).atoms()) sum += a.weight * g[a.state.index()];
    out[i] = sum;
  }
  return out;
}

Observable dual_apply(const MetricModel& model, const Observable& f) {
  auto values = dual_apply_values(model, f.values());
  const double lip = lipschitz_constant(values, model);
  return Observable(std::move(values), f.sup_bound(), lip);
}

Observable dual_iterate(const MetricModel& model, const Observable& f, std::size_t n) {
  if (n == 0) return f;
  std::vector<double> g(f.values().begin(), f.values().end());
  for (std::size_t k = 0; k < n; ++k) g = dual_apply_values(model, g);
  const double lip = lipschitz_constant(g, model);
  return Observable(std::move(g), f.sup_bound(), lip);
}

Observable cesaro_average(const MetricModel& model, const Observable& f, std::size_t n) {
  if (n == 0) throw ArgumentError("cesaro_average: n must be at least 1");
  std::vector<double> sum(model.num_states(), 0.0);
  for_each_dual_iterate(model, f.values(), n, [&](std::size_t, std::span<const double> g) {
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += g[i];
  });
  for (auto& v : sum) v /= double(n);
  const double lip = lipschitz_constant(sum, model);
  return Observable(std::move(sum), f.sup_bound(), lip);
}

double dobrushin_coefficient(const MetricModel& model) {
  const std::size_t n = model.num_states();
  double min_overlap = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto& ri = model.kernel_row(StateId(i));
      const auto& rj = model.kernel_row(StateId(j));
      double overlap = 0.0;
      for (const auto& a : ri.atoms()) overlap += std::min(a.weight, rj.weight(a.state));
      min_overlap = std::min(min_overlap, overlap);
    }
  }
  return 1.0 - min_overlap;
}

}  // namespace markovlab
