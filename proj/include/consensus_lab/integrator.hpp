#pragma once

#include <Eigen/Core>

namespace consensus_lab {

/// One classical fourth-order Runge-Kutta step of x' = field(x, t).
template <typename Field, typename Derived>
typename Derived::PlainObject rk4_step(const Field& field, const Eigen::MatrixBase<Derived>& x,
                                       typename Derived::Scalar t,
                                       typename Derived::Scalar dt) {
  using Scalar = typename Derived::Scalar;
  using State = typename Derived::PlainObject;
  const Scalar half = dt / Scalar(2);
  const State k1 = field(x, t);
  const State k2 = field((x + half * k1).eval(), t + half);
  const State k3 = field((x + half * k2).eval(), t + half);
  const State k4 = field((x + dt * k3).eval(), t + dt);
  return x + (dt / Scalar(6)) * (k1 + Scalar(2) * k2 + Scalar(2) * k3 + k4);
}

}  // namespace consensus_lab
