#pragma once

// Critically damped contact-force transmission (cd-DS), the alpha <-> (K, B)
// stiffness mapping, and the indirect force-control set-point generator.

#include "bicatch/errors.hpp"
#include "bicatch/types.hpp"

namespace bicatch::force {

inline constexpr Real kStiffnessFloor = 1.0;  // [N/m], set-point division guard

struct CdDsParams {
  Real alpha = 1.0;   // [1/s]
  Real m_des = 1.0;   // desired mass [kg]
  Real k_stiff = 1.0; // [N/m]
  Real b_damp = 2.0;  // [N s/m], critically damped: B = 2 sqrt(M K)
};

struct ForceState {
  Real f = 0.0;      // normal force magnitude [N]
  Real f_dot = 0.0;  // [N/s]
};

// Exact discretization of F'' + 2a F' + a^2 F = a^2 F_target over dt
// (closed-form matrix exponential for the repeated eigenvalue -a).
ForceState cdds_step(const ForceState& state, Real alpha, Real f_target, Real dt);

// K = alpha^2 M, B = 2 alpha M.
CdDsParams alpha_to_stiffness(Real alpha, Real m_des);

// 5% settling time of the critically damped response: 3.0 / alpha.
Real settling_time(Real alpha);

// Indirect force control set-point: x_d = x + F / K, componentwise.
// Throws ZeroStiffness when any stiffness component is below the floor.
Vec3 setpoint(const Vec3& x_actual, const Vec3& f_desired, const Vec3& k_diag);

}  // namespace bicatch::force
