#include "markovlab/measure.hpp"

namespace markovlab {

Measure to_double(const ExactMeasure& m) {
  std::vector<Atom<double>> atoms;
  atoms.reserve(m.size());
  for (const auto& a : m.atoms()) atoms.push_back({a.state, a.weight.convert_to<double>()});
  return Measure::from_atoms(std::move(atoms));
}

ExactMeasure to_exact(const Measure& m) {
  std::vector<Atom<Rational>> atoms;
  atoms.reserve(m.size());
  for (const auto& a : m.atoms()) atoms.push_back({a.state, Rational(a.weight)});
  return ExactMeasure::from_atoms(std::move(atoms));
}

}  // namespace markovlab
