#include "markovlab/observable.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "markovlab/error.hpp"

namespace markovlab {

namespace {

constexpr std::size_t kExhaustiveLimit = 200;
constexpr std::size_t kSampledPairs = 40000;

}  // namespace

Observable::Observable(std::vector<double> values, double sup_bound, double lip_const)
    : values_(std::move(values)), sup_bound_(sup_bound), lip_const_(lip_const) {
  if (!(sup_bound >= 0.0) || !(lip_const >= 0.0)) {
    throw ArgumentError("observable bounds must be nonnegative");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw ArgumentError("observable value is not finite");
  }
}

double oscillation(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return *hi - *lo;
}

double sup_norm(std::span<const double> values) {
  double s = 0.0;
  for (double v : values) s = std::max(s, std::abs(v));
  return s;
}

double lipschitz_constant(std::span<const double> values, const MetricModel& model) {
  double lip = 0.0;
  const std::size_t n = values.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double diff = std::abs(values[i] - values[j]);
      if (diff == 0.0) continue;
      lip = std::max(lip, diff / model.distance(StateId(i), StateId(j)));
    }
  }
  return lip;
}

void validate_observable(const Observable& f, const MetricModel& model) {
  const std::size_t n = model.num_states();
  if (f.size() != n) {
    throw ArgumentError("observable has " + std::to_string(f.size()) + " values for " +
                        std::to_string(n) + " states");
  }
  const double sup_slack = kMassTolerance * std::max(1.0, f.sup_bound());
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(f(StateId(i))) > f.sup_bound() + sup_slack) {
      throw ArgumentError("observable exceeds its sup bound at state " + std::to_string(i));
    }
  }
  auto check = [&](std::size_t i, std::size_t j) {
    const double d = model.distance(StateId(i), StateId(j));
    const double diff = std::abs(f(StateId(i)) - f(StateId(j)));
    if (diff > f.lip_const() * d + kMassTolerance * std::max(1.0, diff)) {
      throw ArgumentError("observable exceeds its Lipschitz constant between states " +
                          std::to_string(i) + " and " + std::to_string(j));
    }
  };
  if (n <= kExhaustiveLimit) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) check(i, j);
    }
  } else {
    std::mt19937_64 rng(0xf00d);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t t = 0; t < kSampledPairs; ++t) check(pick(rng), pick(rng));
  }
}

Observable constant_observable(const MetricModel& model, double c) {
  return Observable(std::vector<double>(model.num_states(), c), std::abs(c), 0.0);
}

Observable identity_on_norm(const MetricModel& model) {
  std::vector<double> v(model.num_states());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = model.norm(StateId(i));
  const double sup = sup_norm(v);
  return Observable(std::move(v), sup, 1.0);
}

Observable min1_2norm(const MetricModel& model) {
  std::vector<double> v(model.num_states());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::min(1.0, 2.0 * model.norm(StateId(i)));
  return Observable(std::move(v), 1.0, 2.0);
}

Observable builtin_observable(std::string_view name, const MetricModel& model) {
  if (name == "identity_on_norm") return identity_on_norm(model);
  if (name == "min1_2norm") return min1_2norm(model);
  throw ArgumentError("unknown built-in observable \"" + std::string(name) + "\"");
}

Observable observable_from_json(const nlohmann::json& doc, const MetricModel& model) {
  if (doc.is_string()) return builtin_observable(doc.get<std::string>(), model);
  if (!doc.is_object()) throw LoadError("observable must be an object or a built-in name");
  if (doc.contains("builtin")) return builtin_observable(doc["builtin"].get<std::string>(), model);
  for (const char* key : {"values", "sup_bound", "lip_const"}) {
    if (!doc.contains(key)) throw LoadError(std::string("observable: missing field \"") + key + "\"");
  }
  const auto& values = doc["values"];
  if (!values.is_object()) throw LoadError("observable: \"values\" must map state ids to numbers");
  std::vector<double> v(model.num_states(), 0.0);
  for (const auto& [key, val] : values.items()) {
    std::size_t id = 0;
    try {
      std::size_t used = 0;
      id = std::stoul(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw LoadError("observable: bad state id \"" + key + "\"");
    }
    if (id >= v.size()) throw LoadError("observable: unknown state id " + key);
    if (!val.is_number()) throw LoadError("observable: value for state " + key + " is not a number");
    v[id] = val.get<double>();
  }
  if (!doc["sup_bound"].is_number() || !doc["lip_const"].is_number()) {
    throw LoadError("observable: bounds must be numbers");
  }
  try {
    Observable f(std::move(v), doc["sup_bound"].get<double>(), doc["lip_const"].get<double>());
    validate_observable(f, model);
    return f;
  } catch (const ArgumentError& e) {
    throw LoadError(std::string("observable: ") + e.what());
  }
}

}  // namespace markovlab
