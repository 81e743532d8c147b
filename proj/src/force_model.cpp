#include "bicatch/force_model.hpp"

#include <cmath>

namespace bicatch::force {

ForceState cdds_step(const ForceState& state, Real alpha, Real f_target, Real dt) {
  // Shift to the equilibrium (F_target, 0); the homogeneous propagator for
  // the companion matrix with repeated eigenvalue -a is
  //   exp(A t) = e^{-a t} [ 1 + a t        t      ]
  //              [ -a^2 t      1 - a t ].
  const Real a = alpha, t = dt;
  const Real e = std::exp(-a * t);
  const Real y0 = state.f - f_target;
  const Real y1 = state.f_dot;
  ForceState next;
  next.f = f_target + e * ((1.0 + a * t) * y0 + t * y1);
  next.f_dot = e * (-a * a * t * y0 + (1.0 - a * t) * y1);
  return next;
}

CdDsParams alpha_to_stiffness(Real alpha, Real m_des) {
  CdDsParams p;
  p.alpha = alpha;
  p.m_des = m_des;
  p.k_stiff = alpha * alpha * m_des;
  p.b_damp = 2.0 * alpha * m_des;
  return p;
}

Real settling_time(Real alpha) { return 3.0 / alpha; }

Vec3 setpoint(const Vec3& x_actual, const Vec3& f_desired, const Vec3& k_diag) {
  for (int i = 0; i < 3; ++i) {
    if (k_diag(i) < kStiffnessFloor) {
      throw ZeroStiffness("stiffness component below floor");
    }
  }
  return x_actual + f_desired.cwiseQuotient(k_diag);
}

}  // namespace bicatch::force
