#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "markovlab/measure.hpp"
#include "markovlab/space.hpp"

namespace markovlab {

/// Bounded Lipschitz function on the states of one model, tabulated, with
/// its declared sup-bound |f| and Lipschitz constant Lip f.
class Observable {
 public:
  Observable() = default;
  Observable(std::vector<double> values, double sup_bound, double lip_const);

  [[nodiscard]] double operator()(StateId s) const { return values_.at(s.index()); }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] double sup_bound() const noexcept { return sup_bound_; }
  [[nodiscard]] double lip_const() const noexcept { return lip_const_; }

 private:
  std::vector<double> values_;
  double sup_bound_ = 0.0;
  double lip_const_ = 0.0;
};

/// <f, mu> = sum f(x) mu(x).
template <class W>
double pair(const Observable& f, const BasicMeasure<W>& mu) {
  double sum = 0.0;
  for (const auto& a : mu.atoms()) sum += f(a.state) * WeightTraits<W>::to_double(a.weight);
  return sum;
}

double oscillation(std::span<const double> values);
double sup_norm(std::span<const double> values);
/// max |g(x) - g(y)| / d(x, y) over all pairs of distinct states.
double lipschitz_constant(std::span<const double> values, const MetricModel& model);

/// Throws ArgumentError if the declared bounds are violated on the model
/// (all pairs up to 200 states, a fixed pseudo-random sample above).
void validate_observable(const Observable& f, const MetricModel& model);

Observable constant_observable(const MetricModel& model, double c);
/// f(x) = norm(x) = d(x, origin).
Observable identity_on_norm(const MetricModel& model);
/// f(x) = min(1, 2 norm(x)).
Observable min1_2norm(const MetricModel& model);
/// Looks up "identity_on_norm" or "min1_2norm".
Observable builtin_observable(std::string_view name, const MetricModel& model);

/// {"values": {"stateId": float}, "sup_bound": float, "lip_const": float};
/// missing states default to 0. Validated against the model.
Observable observable_from_json(const nlohmann::json& doc, const MetricModel& model);

}  // namespace markovlab
