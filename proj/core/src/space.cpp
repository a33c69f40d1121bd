#include "markovlab/space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "markovlab/ball.hpp"
#include "markovlab/error.hpp"
#include "markovlab/markov_operator.hpp"

namespace markovlab {

namespace {

constexpr std::size_t kExhaustiveTripleLimit = 200;
constexpr std::size_t kExhaustivePairLimit = 2000;
constexpr std::size_t kSampledTriples = 20000;

std::string state_name(const std::vector<StateDescriptor>& states, std::size_t i) {
  std::ostringstream os;
  os << "state " << i;
  if (i < states.size() && !states[i].label.empty()) os << " (" << states[i].label << ")";
  return os.str();
}

double rel_tol(double scale) { return kMassTolerance * std::max(1.0, scale); }

}  // namespace

std::string to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::explicit_matrix: return "explicit";
    case MetricKind::coords_linf: return "coords_linf";
    case MetricKind::real_abs: return "real_abs";
    case MetricKind::prime_levels: return "prime_levels";
  }
  return "unknown";
}

Ball::Ball(StateId c, double r) : center(c), radius(r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw ArgumentError("ball radius must be positive and finite");
}

MetricModel::MetricModel(Spec spec)
    : name_(std::move(spec.name)),
      states_(std::move(spec.states)),
      metric_(spec.metric),
      matrix_(std::move(spec.distance_matrix)),
      exact_kernel_(std::move(spec.kernel)),
      invariant_(std::move(spec.invariant)),
      origin_(spec.origin),
      accumulation_points_(std::move(spec.accumulation_points)) {
  if (states_.empty()) throw LoadError("model has no states");
  const std::size_t n = states_.size();
  if (origin_.index() >= n) throw LoadError("origin is not a valid state");
  for (auto s : accumulation_points_) {
    if (s.index() >= n) throw LoadError("accumulation point is not a valid state");
  }
  std::sort(accumulation_points_.begin(), accumulation_points_.end());

  validate_metric();

  kernel_.reserve(exact_kernel_.size());
  for (const auto& row : exact_kernel_) kernel_.push_back(to_double(row));
  validate_kernel();
  deterministic_ = std::all_of(kernel_.begin(), kernel_.end(),
                               [](const Measure& r) { return r.size() == 1; });
  validate_invariant();
}

const StateDescriptor& MetricModel::state(StateId s) const {
  check_id(s);
  return states_[s.index()];
}

void MetricModel::check_id(StateId s) const {
  if (s.index() >= states_.size()) {
    throw ArgumentError("invalid state id " + std::to_string(s.value) + " (model has " +
                        std::to_string(states_.size()) + " states)");
  }
}

double MetricModel::distance(StateId a, StateId b) const {
  check_id(a);
  check_id(b);
  if (a == b) return 0.0;
  const auto& sa = states_[a.index()];
  const auto& sb = states_[b.index()];
  switch (metric_) {
    case MetricKind::explicit_matrix:
      return matrix_[a.index() * states_.size() + b.index()];
    case MetricKind::real_abs:
      return std::abs(sa.coords[0] - sb.coords[0]);
    case MetricKind::coords_linf: {
      double d = 0.0;
      for (std::size_t k = 0; k < sa.coords.size(); ++k) {
        d = std::max(d, std::abs(sa.coords[k] - sb.coords[k]));
      }
      return d;
    }
    case MetricKind::prime_levels: {
      // Distinct non-zero states live at distinct positions k^i - 1, so the
      // sup-norm of the difference is the larger of the two entries.
      const double va = sa.level == 0 ? 0.0 : double(sa.level) / double(sa.prime);
      const double vb = sb.level == 0 ? 0.0 : double(sb.level) / double(sb.prime);
      return std::max(va, vb);
    }
  }
  return 0.0;
}

const Measure& MetricModel::kernel_row(StateId s) const {
  check_id(s);
  return kernel_[s.index()];
}

const ExactMeasure& MetricModel::exact_kernel_row(StateId s) const {
  check_id(s);
  return exact_kernel_[s.index()];
}

bool MetricModel::is_accumulation_point(StateId s) const {
  return std::binary_search(accumulation_points_.begin(), accumulation_points_.end(), s);
}

StateId MetricModel::successor(StateId s) const {
  const auto& row = kernel_row(s);
  if (row.size() != 1) throw ArgumentError("successor: kernel row is not a Dirac measure");
  return row.atoms().front().state;
}

std::optional<StateId> MetricModel::find_label(std::string_view label) const {
  for (std::size_t i = 0; i < states_.size(); ++i) {
    if (states_[i].label == label) return StateId(i);
  }
  return std::nullopt;
}

std::vector<double> MetricModel::distance_table() const {
  const std::size_t n = states_.size();
  std::vector<double> table(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) table[i * n + j] = distance(StateId(i), StateId(j));
  }
  return table;
}

void MetricModel::validate_metric() const {
  const std::size_t n = states_.size();
  switch (metric_) {
    case MetricKind::explicit_matrix:
      if (matrix_.size() != n * n) {
        throw LoadError("metric matrix must be " + std::to_string(n) + "x" + std::to_string(n));
      }
      break;
    case MetricKind::real_abs:
      for (std::size_t i = 0; i < n; ++i) {
        if (states_[i].coords.size() != 1) {
          throw LoadError("real_abs metric needs exactly one coordinate at " + state_name(states_, i));
        }
      }
      break;
    case MetricKind::coords_linf:
      for (std::size_t i = 0; i < n; ++i) {
        if (states_[i].coords.empty() || states_[i].coords.size() != states_[0].coords.size()) {
          throw LoadError("coords_linf metric needs equal-length coordinates at " +
                          state_name(states_, i));
        }
      }
      break;
    case MetricKind::prime_levels:
      for (std::size_t i = 0; i < n; ++i) {
        const auto& s = states_[i];
        if (s.level > 0 && (s.prime < 2 || s.level > s.prime)) {
          throw LoadError("invalid (prime, level) at " + state_name(states_, i));
        }
      }
      break;
  }
  for (const auto& s : states_) {
    for (double c : s.coords) {
      if (!std::isfinite(c)) throw LoadError("non-finite coordinate");
    }
  }

  auto d = [this](std::size_t a, std::size_t b) { return distance(StateId(a), StateId(b)); };
  auto check_pair = [&](std::size_t i, std::size_t j) {
    const double dij = d(i, j);
    const double dji = d(j, i);
    if (!std::isfinite(dij) || dij < 0.0) {
      throw LoadError("metric negative or not finite between " + state_name(states_, i) +
                      " and " + state_name(states_, j));
    }
    if (i == j) {
      if (metric_ == MetricKind::explicit_matrix && matrix_[i * n + i] != 0.0) {
        throw LoadError("metric diagonal not zero at " + state_name(states_, i));
      }
      return;
    }
    if (dij == 0.0) {
      throw LoadError("metric zero between distinct " + state_name(states_, i) + " and " +
                      state_name(states_, j));
    }
    if (std::abs(dij - dji) > rel_tol(dij)) {
      throw LoadError("metric not symmetric between " + state_name(states_, i) + " and " +
                      state_name(states_, j));
    }
  };
  auto check_triple = [&](std::size_t a, std::size_t b, std::size_t c) {
    const double lhs = d(a, c);
    const double rhs = d(a, b) + d(b, c);
    if (lhs > rhs + rel_tol(lhs)) {
      throw LoadError("metric violates the triangle inequality on " + state_name(states_, a) +
                      ", " + state_name(states_, b) + ", " + state_name(states_, c));
    }
  };

  if (n <= kExhaustivePairLimit) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) check_pair(i, j);
    }
  }
  if (n <= kExhaustiveTripleLimit) {
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        for (std::size_t c = 0; c < n; ++c) check_triple(a, b, c);
      }
    }
  } else {
    std::mt19937_64 rng(0x5eed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (std::size_t t = 0; t < kSampledTriples; ++t) {
      const auto a = pick(rng), b = pick(rng), c = pick(rng);
      if (n > kExhaustivePairLimit) {
        check_pair(a, b);
        check_pair(b, c);
      }
      check_triple(a, b, c);
    }
  }
}

void MetricModel::validate_kernel() const {
  const std::size_t n = states_.size();
  if (exact_kernel_.size() != n) {
    throw LoadError("kernel has " + std::to_string(exact_kernel_.size()) + " rows for " +
                    std::to_string(n) + " states");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& a : kernel_[i].atoms()) {
      if (a.state.index() >= n) {
        throw LoadError("kernel row of " + state_name(states_, i) + " targets unknown state " +
                        std::to_string(a.state.value));
      }
    }
    const double mass = kernel_[i].total_mass();
    if (std::abs(mass - 1.0) > kMassTolerance) {
      std::ostringstream os;
      os.precision(17);
      os << "row mass ≠ 1 at " << state_name(states_, i) << " (mass " << mass << ")";
      throw LoadError(os.str());
    }
  }
}

void MetricModel::validate_invariant() const {
  if (!invariant_) return;
  for (const auto& a : invariant_->atoms()) {
    if (a.state.index() >= states_.size()) {
      throw LoadError("invariant measure references unknown state " + std::to_string(a.state.value));
    }
  }
  if (!invariant_->is_probability()) throw LoadError("invariant measure is not a probability measure");
  const Measure image = apply(*this, *invariant_);
  const double dev = max_deviation(image, *invariant_);
  if (dev > kMassTolerance) {
    std::ostringstream os;
    os << "invariant measure is not invariant (max atom deviation " << dev << ")";
    throw LoadError(os.str());
  }
}

// ---------------------------------------------------------------------------
// Built-in models

StateId example1_state(std::size_t m) { return StateId(m); }

MetricModel build_example1(std::size_t m_max) {
  if (m_max < 2) throw ArgumentError("example1: m_max must be at least 2");
  MetricModel::Spec spec;
  spec.name = "example1";
  spec.metric = MetricKind::real_abs;
  spec.states.push_back({"0", {0.0}});
  for (std::size_t m = 1; m <= m_max; ++m) {
    spec.states.push_back({"1/" + std::to_string(m), {1.0 / double(m)}});
  }
  spec.kernel.push_back(dirac<Rational>(StateId(0)));
  spec.kernel.push_back(dirac<Rational>(StateId(0)));
  for (std::size_t m = 2; m <= m_max; ++m) spec.kernel.push_back(dirac<Rational>(StateId(m - 1)));
  spec.invariant = dirac(StateId(0));
  spec.origin = StateId(0);
  spec.accumulation_points = {StateId(0)};
  return MetricModel(std::move(spec));
}

bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

StateId example2_state(std::span<const std::uint32_t> primes, std::uint32_t prime,
                       std::uint32_t level) {
  if (level == 0) return StateId(0);
  std::size_t offset = 1;
  for (auto p : primes) {
    if (p == prime) {
      if (level > p) throw ArgumentError("example2: level exceeds prime");
      return StateId(offset + level - 1);
    }
    offset += p;
  }
  throw ArgumentError("example2: prime " + std::to_string(prime) + " not in the model");
}

MetricModel build_example2(std::span<const std::uint32_t> primes) {
  if (primes.empty()) throw ArgumentError("example2: prime list is empty");
  std::set<std::uint32_t> seen;
  for (auto p : primes) {
    if (!is_prime(p)) throw ArgumentError("example2: " + std::to_string(p) + " is not prime");
    if (!seen.insert(p).second) throw ArgumentError("example2: repeated prime " + std::to_string(p));
  }
  MetricModel::Spec spec;
  spec.name = "example2";
  spec.metric = MetricKind::prime_levels;
  spec.states.push_back({"zero", {}, 0, 0});
  spec.kernel.push_back(dirac<Rational>(StateId(0)));
  std::size_t offset = 1;
  for (auto p : primes) {
    for (std::uint32_t i = 1; i <= p; ++i) {
      spec.states.push_back(
          {"(" + std::to_string(p) + "," + std::to_string(i) + ")", {}, p, i});
      const StateId next = i < p ? StateId(offset + i) : StateId(0);
      spec.kernel.push_back(dirac<Rational>(next));
    }
    offset += p;
  }
  spec.invariant = dirac(StateId(0));
  spec.origin = StateId(0);
  spec.accumulation_points = {StateId(0)};
  return MetricModel(std::move(spec));
}

MetricModel build_halfmap(std::size_t depth) {
  if (depth < 1) throw ArgumentError("halfmap: depth must be at least 1");
  MetricModel::Spec spec;
  spec.name = "halfmap";
  spec.metric = MetricKind::real_abs;
  spec.states.push_back({"0", {0.0}});
  spec.kernel.push_back(dirac<Rational>(StateId(0)));
  for (std::size_t j = 0; j <= depth; ++j) {
    spec.states.push_back({"2^-" + std::to_string(j), {std::ldexp(1.0, -int(j))}});
    spec.kernel.push_back(dirac<Rational>(j < depth ? StateId(j + 2) : StateId(0)));
  }
  spec.invariant = dirac(StateId(0));
  spec.origin = StateId(0);
  spec.accumulation_points = {StateId(0)};
  return MetricModel(std::move(spec));
}

std::vector<double> solve_stationary(const Matrix& transition) {
  const auto n = static_cast<Eigen::Index>(transition.size());
  Eigen::MatrixXd a(n + 1, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      // Row i of (P^T - I).
      a(i, j) = transition[std::size_t(j)][std::size_t(i)] - (i == j ? 1.0 : 0.0);
    }
  }
  a.row(n).setOnes();
  b(n) = 1.0;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(a.topRows(n));
  lu.setThreshold(1e-10);
  if (n > 1 && lu.rank() != n - 1) throw DomainError("invariant measure is not unique");

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::VectorXd x = qr.solve(b);
  // One step of iterative refinement.
  x += qr.solve(b - a * x);

  std::vector<double> mu(std::size_t(n), 0.0);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double v = x(i);
    if (v < -1e-9) throw DomainError("stationary solve produced a negative weight");
    if (std::abs(v) < 1e-15) v = 0.0;
    mu[std::size_t(i)] = v;
    sum += v;
  }
  for (auto& v : mu) v /= sum;
  return mu;
}

namespace {

MetricModel build_matrix_model(std::vector<ExactMeasure> rows, const Matrix& transition,
                               const Matrix& metric, std::string name) {
  const std::size_t n = transition.size();
  if (n == 0) throw ArgumentError("transition matrix is empty");
  if (metric.size() != n) throw ArgumentError("metric and transition sizes differ");
  MetricModel::Spec spec;
  spec.name = std::move(name);
  spec.metric = MetricKind::explicit_matrix;
  for (std::size_t i = 0; i < n; ++i) {
    if (metric[i].size() != n) throw ArgumentError("metric matrix is not square");
    spec.states.push_back({std::to_string(i), {}});
    spec.distance_matrix.insert(spec.distance_matrix.end(), metric[i].begin(), metric[i].end());
  }
  spec.kernel = std::move(rows);
  try {
    const auto pi = solve_stationary(transition);
    std::vector<Atom<double>> atoms;
    for (std::size_t i = 0; i < n; ++i) atoms.push_back({StateId(i), pi[i]});
    spec.invariant = Measure::from_atoms(std::move(atoms));
    return MetricModel(std::move(spec));
  } catch (const LoadError& e) {
    throw ArgumentError(e.what());
  } catch (const DomainError& e) {
    throw ArgumentError(e.what());
  }
}

void check_stochastic(const Matrix& t) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i].size() != t.size()) throw ArgumentError("transition matrix is not square");
    double sum = 0.0;
    for (double p : t[i]) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw ArgumentError("transition matrix has a negative or non-finite entry in row " +
                            std::to_string(i));
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kMassTolerance) {
      throw ArgumentError("row mass ≠ 1 in row " + std::to_string(i));
    }
  }
}

}  // namespace

MetricModel build_doeblin(const Matrix& transition, const Matrix& metric, std::string name) {
  check_stochastic(transition);
  std::vector<ExactMeasure> rows;
  for (std::size_t i = 0; i < transition.size(); ++i) {
    std::vector<Atom<Rational>> atoms;
    for (std::size_t j = 0; j < transition.size(); ++j) {
      atoms.push_back({StateId(j), Rational(transition[i][j])});
    }
    rows.push_back(ExactMeasure::from_atoms(std::move(atoms)));
  }
  return build_matrix_model(std::move(rows), transition, metric, std::move(name));
}

MetricModel build_doeblin(const ExactMatrix& transition, const Matrix& metric, std::string name) {
  Matrix approx(transition.size());
  std::vector<ExactMeasure> rows;
  for (std::size_t i = 0; i < transition.size(); ++i) {
    if (transition[i].size() != transition.size()) {
      throw ArgumentError("transition matrix is not square");
    }
    std::vector<Atom<Rational>> atoms;
    Rational sum(0);
    for (std::size_t j = 0; j < transition.size(); ++j) {
      if (transition[i][j] < 0) {
        throw ArgumentError("transition matrix has a negative entry in row " + std::to_string(i));
      }
      sum += transition[i][j];
      atoms.push_back({StateId(j), transition[i][j]});
      approx[i].push_back(transition[i][j].convert_to<double>());
    }
    if (sum != 1) throw ArgumentError("row mass ≠ 1 in row " + std::to_string(i));
    rows.push_back(ExactMeasure::from_atoms(std::move(atoms)));
  }
  return build_matrix_model(std::move(rows), approx, metric, std::move(name));
}

MetricModel build_doeblin3() {
  const Matrix p = {{0.8, 0.1, 0.1}, {0.1, 0.8, 0.1}, {0.1, 0.1, 0.8}};
  const double pos[3] = {0.0, 1.0, 3.0};
  Matrix d(3, std::vector<double>(3));
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) d[i][j] = std::abs(pos[i] - pos[j]);
  }
  return build_doeblin(p, d, "doeblin3");
}

// ---------------------------------------------------------------------------
// Ball helpers

std::vector<double> realized_distances(const MetricModel& model, StateId center) {
  std::vector<double> out;
  out.reserve(model.num_states());
  for (std::size_t i = 0; i < model.num_states(); ++i) out.push_back(model.distance(StateId(i), center));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Ball> midpoint_balls(const MetricModel& model, StateId center) {
  const auto dist = realized_distances(model, center);
  std::vector<Ball> out;
  for (std::size_t i = 0; i + 1 < dist.size(); ++i) {
    out.emplace_back(center, 0.5 * (dist[i] + dist[i + 1]));
  }
  out.emplace_back(center, dist.back() + 1.0);
  return out;
}

std::vector<StateId> ball_states(const MetricModel& model, const Ball& ball) {
  std::vector<StateId> out;
  for (std::size_t i = 0; i < model.num_states(); ++i) {
    if (in_ball(model, ball, StateId(i))) out.push_back(StateId(i));
  }
  return out;
}

}  // namespace markovlab
