#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>

#include <boost/multiprecision/gmp.hpp>

namespace markovlab {

/// Handle into a model's state table. Valid ids are 0..num_states-1.
struct StateId {
  std::uint32_t value = 0;

  constexpr StateId() = default;
  constexpr explicit StateId(std::size_t v) : value(static_cast<std::uint32_t>(v)) {}

  [[nodiscard]] constexpr std::size_t index() const noexcept { return value; }

  constexpr auto operator<=>(const StateId&) const = default;
};

/// Exact rational weights for the telescoping checks.
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;

/// Absolute tolerance used for every floating-point mass comparison.
inline constexpr double kMassTolerance = 1e-12;

template <class W>
struct WeightTraits;

template <>
struct WeightTraits<double> {
  static constexpr bool exact = false;
  static double tolerance() { return kMassTolerance; }
  static double from_double(double v) { return v; }
  static double to_double(double v) { return v; }
};

template <>
struct WeightTraits<Rational> {
  static constexpr bool exact = true;
  static Rational tolerance() { return Rational(0); }
  // mpq_set_d is exact: every finite double is a dyadic rational.
  static Rational from_double(double v) { return Rational(v); }
  static double to_double(const Rational& v) { return v.convert_to<double>(); }
};

template <class W>
concept Weight = requires { WeightTraits<W>::exact; };

}  // namespace markovlab

template <>
struct std::hash<markovlab::StateId> {
  std::size_t operator()(const markovlab::StateId& s) const noexcept {
    return std::hash<std::uint32_t>{}(s.value);
  }
};
