#pragma once

#include <stdexcept>
#include <string>

namespace markovlab {

/// Invalid caller input: bad ids, malformed parameters, violated preconditions.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A mathematical precondition failed on otherwise well-formed input
/// (conditioning on a null ball, a residual that is not a measure, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A model or observable document failed validation.
class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A bounded search ran out of horizon before finding what it needed.
class SearchHorizonError : public std::runtime_error {
 public:
  SearchHorizonError(const std::string& what, std::size_t level)
      : std::runtime_error(what), level_(level) {}

  /// 1-based level at which the search failed.
  [[nodiscard]] std::size_t level() const noexcept { return level_; }

 private:
  std::size_t level_;
};

/// Should never happen; carries a dump of the offending problem.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace markovlab
