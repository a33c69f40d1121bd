#pragma once

#include <cstddef>
#include <vector>

#include "markovlab/measure.hpp"
#include "markovlab/observable.hpp"
#include "markovlab/space.hpp"

namespace markovlab {

/// Default cap on iteration counts used by diagnostics and the CLI.
inline constexpr std::size_t kDefaultHorizon = 10'000;

/// P mu = sum_x mu(x) kernel(x).
template <class W>
BasicMeasure<W> apply(const MetricModel& model, const BasicMeasure<W>& mu) {
  std::vector<Atom<W>> atoms;
  for (const auto& a : mu.atoms()) {
    for (const auto& r : model.row<W>(a.state).atoms()) {
      atoms.push_back({r.state, a.weight * r.weight});
    }
  }
  return BasicMeasure<W>::from_atoms(std::move(atoms));
}

/// P^n mu.
template <class W>
BasicMeasure<W> iterate(const MetricModel& model, BasicMeasure<W> mu, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) mu = apply(model, mu);
  return mu;
}

/// (Ug)(x) = <g, kernel(x)> on a raw value table.
std::vector<double> dual_apply_values(const MetricModel& model, std::span<const double> g);

/// Uf; the sup-bound is inherited from f, the Lipschitz constant is measured.
Observable dual_apply(const MetricModel& model, const Observable& f);
/// U^n f.
Observable dual_iterate(const MetricModel& model, const Observable& f, std::size_t n);
/// (1/n) sum_{k=1..n} U^k f, from one forward sweep. n = 0 is an ArgumentError.
Observable cesaro_average(const MetricModel& model, const Observable& f, std::size_t n);

/// Visits U^1 f, ..., U^n f in order without storing them.
template <class Visitor>
void for_each_dual_iterate(const MetricModel& model, std::span<const double> f, std::size_t n,
                           Visitor&& visit) {
  std::vector<double> g(f.begin(), f.end());
  for (std::size_t k = 1; k <= n; ++k) {
    g = dual_apply_values(model, g);
    visit(k, std::as_const(g));
  }
}

/// 1 - min_{i,j} sum_k min(p_ik, p_jk).
double dobrushin_coefficient(const MetricModel& model);

}  // namespace markovlab
