#pragma once

// Rigid-body state in ZYX Euler parameterization, free-flight integration,
// and the small kinematic helpers every other module builds on.

#include <string>

#include "bicatch/errors.hpp"
#include "bicatch/types.hpp"

namespace bicatch {

// Pitch band kept clear of the ZYX gimbal singularity.
inline constexpr Real kPitchSingularityEps = 1e-3;

struct ObjectModel {
  Real mass = 1.0;                     // [kg]
  Mat3 inertia = Mat3::Identity();     // body frame [kg m^2]
  std::string mesh_ref;                // identifier of a TriangleMesh
  Real friction_mu = 0.5;
  Vec3 com_offset = Vec3::Zero();      // mesh frame [m]

  // mass > 0, inertia symmetric positive definite, friction_mu >= 0.
  bool valid(std::string* why = nullptr) const;

  // Solid-box model: dimensions [m], uniform density.
  static ObjectModel box(Real mass, const Vec3& dims, Real mu = 0.5);
};

struct RigidBodyState {
  Vec3 position = Vec3::Zero();         // [m], world
  Vec3 orientation_zyx = Vec3::Zero();  // (yaw z, pitch y, roll x) [rad]
  Vec3 lin_vel = Vec3::Zero();          // [m/s], world
  Vec3 ang_vel = Vec3::Zero();          // [rad/s], world
};

// R = Rz(a0) * Ry(a1) * Rx(a2).
Mat3 euler_zyx_to_rotation(const Vec3& angles_zyx);

// Kinematic map T with omega = T(angles) * rates, rates = (yaw', pitch', roll').
Mat3 euler_zyx_kinematic_map(const Vec3& angles_zyx);

// Solves T(angles) * rates = omega. Throws SingularOrientation near |pitch| = pi/2.
Vec3 angular_velocity_to_euler_rates(const Vec3& angles_zyx, const Vec3& omega);

// World-frame inertia at the given orientation: R * I_body * R^T.
Mat3 world_inertia(const ObjectModel& model, const Vec3& angles_zyx);

// One free-motion step: closed-form ballistic translation, RK4 on the
// Euler-angle/angular-velocity pair (torque-free Euler equations).
RigidBodyState integrate_free_rigid_body(const RigidBodyState& state,
                                         const ObjectModel& model,
                                         const Vec3& gravity, Real dt);

}  // namespace bicatch
