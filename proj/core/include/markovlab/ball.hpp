#pragma once

#include <vector>

#include "markovlab/measure.hpp"
#include "markovlab/space.hpp"

namespace markovlab {

[[nodiscard]] inline bool in_ball(const MetricModel& model, const Ball& ball, StateId x) {
  return model.distance(x, ball.center) < ball.radius;
}

/// mu(B): total weight of atoms strictly inside the ball.
template <class W>
W ball_mass(const BasicMeasure<W>& mu, const Ball& ball, const MetricModel& model) {
  W sum(0);
  for (const auto& a : mu.atoms()) {
    if (in_ball(model, ball, a.state)) sum += a.weight;
  }
  return sum;
}

/// mu(. n B) / mu(B). Throws DomainError when mu(B) = 0.
template <class W>
BasicMeasure<W> restrict_normalize(const BasicMeasure<W>& mu, const Ball& ball,
                                   const MetricModel& model) {
  std::vector<Atom<W>> inside;
  W mass(0);
  for (const auto& a : mu.atoms()) {
    if (in_ball(model, ball, a.state)) {
      inside.push_back(a);
      mass += a.weight;
    }
  }
  if (!(mass > W(0))) throw DomainError("conditioning on null ball");
  for (auto& a : inside) a.weight /= mass;
  return BasicMeasure<W>::from_atoms(std::move(inside));
}

/// Sorted distinct distances from `center` to every state of the model.
std::vector<double> realized_distances(const MetricModel& model, StateId center);

/// Balls centered at `center` whose radii sit at midpoints between
/// consecutive realized distances (plus one past the farthest state).
std::vector<Ball> midpoint_balls(const MetricModel& model, StateId center);

/// States inside the ball, in id order.
std::vector<StateId> ball_states(const MetricModel& model, const Ball& ball);

}  // namespace markovlab
