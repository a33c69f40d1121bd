#include "markovlab/flat_metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "markovlab/error.hpp"

namespace markovlab {

namespace {

constexpr double kPivotEps = 1e-12;

struct Constraint {
  std::size_t plus;   // coefficient +1 on g_plus
  std::size_t minus;  // coefficient -1 on g_minus, or npos for the box row
  double rhs;
};

constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

// Tucker tableau: basic(r) = rhs[r] - sum_c a(r, c) * nonbasic(c),
// objective = value + sum_c cost[c] * nonbasic(c). Labels 0..n-1 are the
// shifted potentials g_i = f_i + 1, labels n.. are slacks.
class Tableau {
 public:
  Tableau(std::size_t vars, const std::vector<Constraint>& rows, std::span<const double> cost)
      : n_(vars), m_(rows.size()), a_(m_ * n_, 0.0), rhs_(m_), cost_(cost.begin(), cost.end()),
        row_label_(m_), col_label_(n_) {
    for (std::size_t r = 0; r < m_; ++r) {
      at(r, rows[r].plus) = 1.0;
      if (rows[r].minus != npos) at(r, rows[r].minus) = -1.0;
      rhs_[r] = rows[r].rhs;
      row_label_[r] = n_ + r;
    }
    for (std::size_t c = 0; c < n_; ++c) col_label_[c] = c;
  }

  /// Returns false when the optimum is reached.
  bool step() {
    std::size_t enter = npos;
    for (std::size_t c = 0; c < n_; ++c) {
      if (cost_[c] > kPivotEps && (enter == npos || col_label_[c] < col_label_[enter])) enter = c;
    }
    if (enter == npos) return false;

    std::size_t leave = npos;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < m_; ++r) {
      const double coef = at(r, enter);
      if (coef <= kPivotEps) continue;
      const double ratio = rhs_[r] / coef;
      if (leave == npos) {
        best = ratio;
        leave = r;
        continue;
      }
      const double tie = kPivotEps * std::max(1.0, std::abs(best));
      if (ratio < best - tie) {
        best = ratio;
        leave = r;
      } else if (ratio <= best + tie && row_label_[r] < row_label_[leave]) {
        best = std::min(best, ratio);
        leave = r;
      }
    }
    // Every potential is boxed, so the problem is never unbounded.
    if (leave == npos) throw InternalError("flat metric LP reported unbounded");
    pivot(leave, enter);
    return true;
  }

  [[nodiscard]] double value() const { return value_; }

  [[nodiscard]] std::vector<double> primal() const {
    std::vector<double> g(n_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) {
      if (row_label_[r] < n_) g[row_label_[r]] = rhs_[r];
    }
    return g;
  }

 private:
  double& at(std::size_t r, std::size_t c) { return a_[r * n_ + c]; }
  [[nodiscard]] double at(std::size_t r, std::size_t c) const { return a_[r * n_ + c]; }

  void pivot(std::size_t pr, std::size_t pc) {
    const double p = at(pr, pc);
    for (std::size_t c = 0; c < n_; ++c) at(pr, c) /= p;
    at(pr, pc) = 1.0 / p;
    rhs_[pr] /= p;

    for (std::size_t r = 0; r < m_; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c < n_; ++c) {
        if (c != pc) at(r, c) -= f * at(pr, c);
      }
      at(r, pc) = -f / p;
      rhs_[r] -= f * rhs_[pr];
      if (rhs_[r] < 0.0 && rhs_[r] > -kPivotEps) rhs_[r] = 0.0;
    }
    const double z = cost_[pc];
    for (std::size_t c = 0; c < n_; ++c) {
      if (c != pc) cost_[c] -= z * at(pr, c);
    }
    cost_[pc] = -z / p;
    value_ += z * rhs_[pr];
    std::swap(row_label_[pr], col_label_[pc]);
  }

  std::size_t n_, m_;
  std::vector<double> a_;
  std::vector<double> rhs_;
  std::vector<double> cost_;
  std::vector<std::size_t> row_label_;
  std::vector<std::size_t> col_label_;
  double value_ = 0.0;
};

bool lipschitz_row_needed(const FlatMetricProblem& p, std::size_t i, std::size_t j) {
  const double dij = p.distance(i, j);
  if (dij >= 2.0) return false;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (k == i || k == j) continue;
    if (p.distance(i, k) + p.distance(k, j) <= dij) return false;
  }
  return true;
}

}  // namespace

std::string FlatMetricProblem::dump() const {
  std::ostringstream os;
  os.precision(17);
  os << "FlatMetricProblem n=" << size() << "\n  c =";
  for (double c : coefficients) os << ' ' << c;
  os << "\n  d =";
  for (std::size_t i = 0; i < size(); ++i) {
    os << "\n   ";
    for (std::size_t j = 0; j < size(); ++j) os << ' ' << distance(i, j);
  }
  return os.str();
}

LpSolution solve_lp(const FlatMetricProblem& problem) {
  const std::size_t n = problem.size();
  if (problem.distances.size() != n * n) throw ArgumentError("solve_lp: distance table size mismatch");
  LpSolution out;
  if (n == 0) return out;

  std::vector<Constraint> rows;
  for (std::size_t i = 0; i < n; ++i) rows.push_back({i, npos, 2.0});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j && lipschitz_row_needed(problem, i, j)) rows.push_back({i, j, problem.distance(i, j)});
    }
  }

  Tableau tableau(n, rows, problem.coefficients);
  const std::size_t guard = 50 * (n + rows.size()) + 1000;
  while (tableau.step()) {
    if (++out.pivots > guard) {
      throw InternalError("simplex pivot guard exceeded after " + std::to_string(out.pivots) +
                          " pivots\n" + problem.dump());
    }
  }
  double shift = 0.0;
  for (double c : problem.coefficients) shift += c;
  out.value = tableau.value() - shift;
  out.potential = tableau.primal();
  for (auto& g : out.potential) g -= 1.0;
  return out;
}

FlatMetricProblem make_flat_problem(const Measure& mu, const Measure& nu, const MetricModel& model) {
  FlatMetricProblem p;
  auto push = [&](StateId s, double c) {
    if (c == 0.0) return;  // zero-coefficient points never tighten the optimum
    p.points.push_back(s);
    p.coefficients.push_back(c);
  };
  auto mi = mu.atoms().begin();
  auto ni = nu.atoms().begin();
  while (mi != mu.atoms().end() || ni != nu.atoms().end()) {
    if (ni == nu.atoms().end() || (mi != mu.atoms().end() && mi->state < ni->state)) {
      push(mi->state, mi->weight);
      ++mi;
    } else if (mi == mu.atoms().end() || ni->state < mi->state) {
      push(ni->state, -ni->weight);
      ++ni;
    } else {
      push(mi->state, mi->weight - ni->weight);
      ++mi;
      ++ni;
    }
  }
  const std::size_t n = p.points.size();
  p.distances.resize(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) p.distances[i * n + j] = model.distance(p.points[i], p.points[j]);
  }
  return p;
}

double flat_distance(const Measure& mu, const Measure& nu, const MetricModel& model) {
  auto problem = make_flat_problem(mu, nu, model);
  if (problem.size() == 0) return 0.0;
  // f -> -f maps the feasible set onto itself, so the sign of c is free;
  // fixing it makes the result bitwise symmetric in (mu, nu).
  if (problem.coefficients.front() < 0.0) {
    for (auto& c : problem.coefficients) c = -c;
  }
  return std::max(0.0, solve_lp(problem).value);
}

}  // namespace markovlab
