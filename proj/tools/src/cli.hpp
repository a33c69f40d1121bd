#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "markovlab/space.hpp"

namespace markovlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitExpectationFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitSearchHorizon = 3;

/// Where the model comes from: a built-in example or a JSON file.
struct ModelSource {
  std::string example;  // example1 | example2 | doeblin3 | halfmap
  std::string path;
  std::size_t m_max = 100;
  std::vector<std::uint32_t> primes{2, 3, 5, 7, 11, 13};
  std::size_t depth = 40;

  /// Throws ArgumentError unless exactly one source is set.
  void validate() const;
  [[nodiscard]] MetricModel load() const;
};

struct RunConfig {
  std::string command;
  ModelSource source;
  std::string observable = "identity_on_norm";  // built-in name or JSON file
  std::string profile;
  std::optional<std::size_t> target;  // --z
  std::optional<std::size_t> start;   // x0
  std::vector<std::size_t> probes;
  std::size_t horizon = 200;
  std::size_t tail_start = 1;
  double tol = 1e-6;
  double radius = 0.0;  // 0: pick the smallest midpoint ball
  double eps = 0.1;
  std::string format = "csv";
  std::string out;

  void validate() const;
};

/// Runs one command line (without the program name). Reports go to `out`
/// unless --out names a file; diagnostics and errors go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace markovlab::cli
