#pragma once

#include <algorithm>
#include <cmath>

namespace consensus_lab {

/// Lower clamp on distances entering chi / distance.
inline constexpr double kDistanceClamp = 1e-6;
/// Inside the obstacle core the potential is frozen at core * (1 + this).
inline constexpr double kCoreSaturation = 1e-6;

/// Inter-agent repulsion: chi / |xi - xj| inside psi, zero at or beyond it.
template <typename Scalar>
Scalar collision_potential(Scalar xi, Scalar xj, Scalar chi, Scalar psi) {
  const Scalar d = std::abs(xi - xj);
  if (d >= psi) return Scalar(0);
  return chi / std::max(d, Scalar(kDistanceClamp));
}

/// Agent-leader repulsion, same form with the leader threshold.
template <typename Scalar>
Scalar leader_potential(Scalar xi, Scalar x0, Scalar chi, Scalar psi0) {
  return collision_potential(xi, x0, chi, psi0);
}

/// [(R^2 - d^2) / (d^2 - core^2)]^2 for core < d <= R, zero for d >= R.
template <typename Scalar>
Scalar obstacle_potential(Scalar xi, Scalar omega, Scalar detect_radius, Scalar core) {
  Scalar d = std::abs(xi - omega);
  if (d >= detect_radius) return Scalar(0);
  d = std::max(d, core * (Scalar(1) + Scalar(kCoreSaturation)));
  const Scalar d2 = d * d;
  const Scalar ratio =
      (detect_radius * detect_radius - d2) / (d2 - core * core);
  return ratio * ratio;
}

}  // namespace consensus_lab
