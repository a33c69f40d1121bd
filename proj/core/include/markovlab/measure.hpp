#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "markovlab/error.hpp"
#include "markovlab/types.hpp"

namespace markovlab {

template <class W>
struct Atom {
  StateId state;
  W weight;

  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Finite-support nonnegative measure. Atoms are kept sorted by state with
/// no duplicates and no zero weights, so equality is a single linear scan.
template <class W>
class BasicMeasure {
 public:
  using weight_type = W;
  using atom_type = Atom<W>;

  BasicMeasure() = default;

  /// Sorts, merges duplicate states and drops zero weights.
  /// Throws ArgumentError on negative or non-finite weights.
  static BasicMeasure from_atoms(std::vector<atom_type> atoms) {
    for (const auto& a : atoms) {
      if constexpr (!WeightTraits<W>::exact) {
        if (!std::isfinite(a.weight)) throw ArgumentError("measure weight is not finite");
      }
      if (a.weight < W(0)) throw ArgumentError("measure weight is negative");
    }
    std::sort(atoms.begin(), atoms.end(),
              [](const atom_type& l, const atom_type& r) { return l.state < r.state; });
    BasicMeasure m;
    m.atoms_.reserve(atoms.size());
    for (auto& a : atoms) {
      if (!m.atoms_.empty() && m.atoms_.back().state == a.state) {
        m.atoms_.back().weight += a.weight;
      } else {
        m.atoms_.push_back(std::move(a));
      }
    }
    std::erase_if(m.atoms_, [](const atom_type& a) { return a.weight == W(0); });
    return m;
  }

  [[nodiscard]] const std::vector<atom_type>& atoms() const noexcept { return atoms_; }
  [[nodiscard]] bool empty() const noexcept { return atoms_.empty(); }
  [[nodiscard]] std::size_t size() const noexcept { return atoms_.size(); }

  [[nodiscard]] W total_mass() const {
    W sum(0);
    for (const auto& a : atoms_) sum += a.weight;
    return sum;
  }

  /// Weight of a single state (0 if not an atom).
  [[nodiscard]] W weight(StateId s) const {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), s,
                               [](const atom_type& a, StateId v) { return a.state < v; });
    if (it != atoms_.end() && it->state == s) return it->weight;
    return W(0);
  }

  /// Mass within kMassTolerance of 1 (compared in double precision in both modes).
  [[nodiscard]] bool is_probability() const {
    return std::abs(WeightTraits<W>::to_double(total_mass()) - 1.0) <= kMassTolerance;
  }

  friend bool operator==(const BasicMeasure&, const BasicMeasure&) = default;

 private:
  std::vector<atom_type> atoms_;
};

using Measure = BasicMeasure<double>;
using ExactMeasure = BasicMeasure<Rational>;

template <class W = double>
BasicMeasure<W> dirac(StateId x) {
  return BasicMeasure<W>::from_atoms({{x, W(1)}});
}

template <class W>
struct Term {
  W coefficient;
  BasicMeasure<W> measure;
};

/// Atomwise weighted sum. Coefficients must be nonnegative.
template <class W>
BasicMeasure<W> combine(std::span<const Term<W>> terms) {
  std::vector<Atom<W>> atoms;
  for (const auto& t : terms) {
    if (t.coefficient < W(0)) throw ArgumentError("combine: negative coefficient");
    if (t.coefficient == W(0)) continue;
    for (const auto& a : t.measure.atoms()) atoms.push_back({a.state, t.coefficient * a.weight});
  }
  return BasicMeasure<W>::from_atoms(std::move(atoms));
}

template <class W>
BasicMeasure<W> combine(std::initializer_list<Term<W>> terms) {
  return combine(std::span<const Term<W>>(terms.begin(), terms.size()));
}

template <class W>
BasicMeasure<W> scale(const BasicMeasure<W>& m, const W& c) {
  return combine<W>({{c, m}});
}

/// States carrying positive weight.
template <class W>
std::vector<StateId> support(const BasicMeasure<W>& m) {
  std::vector<StateId> out;
  out.reserve(m.size());
  for (const auto& a : m.atoms()) out.push_back(a.state);
  return out;
}

/// (mu - alpha*nu) / (1 - alpha): the part of mu left after removing an
/// alpha-share of nu. Floating dust of magnitude below kMassTolerance is
/// clipped to zero; anything more negative is a DomainError.
template <class W>
BasicMeasure<W> residual(const BasicMeasure<W>& mu, const W& alpha, const BasicMeasure<W>& nu) {
  if (!(alpha > W(0) && alpha < W(1))) throw ArgumentError("residual: alpha must lie in (0, 1)");
  const W tol = WeightTraits<W>::tolerance();
  const W denom = W(1) - alpha;

  std::vector<Atom<W>> out;
  auto mi = mu.atoms().begin();
  auto ni = nu.atoms().begin();
  auto emit = [&](StateId s, const W& mw, const W& nw) {
    W removed = alpha * nw;
    if (removed > mw + tol) {
      throw DomainError("residual not a measure: alpha exceeds the available mass at state " +
                        std::to_string(s.value));
    }
    W v = (mw - removed) / denom;
    if constexpr (!WeightTraits<W>::exact) {
      if (std::abs(v) < kMassTolerance) v = 0.0;
    }
    if (v > W(0)) out.push_back({s, std::move(v)});
  };
  while (mi != mu.atoms().end() || ni != nu.atoms().end()) {
    if (ni == nu.atoms().end() || (mi != mu.atoms().end() && mi->state < ni->state)) {
      emit(mi->state, mi->weight, W(0));
      ++mi;
    } else if (mi == mu.atoms().end() || ni->state < mi->state) {
      emit(ni->state, W(0), ni->weight);
      ++ni;
    } else {
      emit(mi->state, mi->weight, ni->weight);
      ++mi;
      ++ni;
    }
  }
  return BasicMeasure<W>::from_atoms(std::move(out));
}

/// max over states of |mu(s) - nu(s)|.
template <class W>
W max_deviation(const BasicMeasure<W>& mu, const BasicMeasure<W>& nu) {
  W worst(0);
  auto mi = mu.atoms().begin();
  auto ni = nu.atoms().begin();
  auto bump = [&](const W& d) {
    W a = d < W(0) ? W(-d) : d;
    if (a > worst) worst = a;
  };
  while (mi != mu.atoms().end() || ni != nu.atoms().end()) {
    if (ni == nu.atoms().end() || (mi != mu.atoms().end() && mi->state < ni->state)) {
      bump(mi->weight);
      ++mi;
    } else if (mi == mu.atoms().end() || ni->state < mi->state) {
      bump(ni->weight);
      ++ni;
    } else {
      bump(mi->weight - ni->weight);
      ++mi;
      ++ni;
    }
  }
  return worst;
}

Measure to_double(const ExactMeasure& m);
ExactMeasure to_exact(const Measure& m);

}  // namespace markovlab
