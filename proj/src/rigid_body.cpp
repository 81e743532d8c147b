#include "bicatch/rigid_body.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace bicatch {

bool ObjectModel::valid(std::string* why) const {
  if (!(mass > 0.0)) {
    if (why) *why = "mass must be positive";
    return false;
  }
  if ((inertia - inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    if (why) *why = "inertia must be symmetric";
    return false;
  }
  Eigen::SelfAdjointEigenSolver<Mat3> eig(inertia);
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    if (why) *why = "inertia must be positive definite";
    return false;
  }
  if (friction_mu < 0.0) {
    if (why) *why = "friction coefficient must be non-negative";
    return false;
  }
  return true;
}

ObjectModel ObjectModel::box(Real mass, const Vec3& dims, Real mu) {
  ObjectModel m;
  m.mass = mass;
  const Real a = dims.x(), b = dims.y(), c = dims.z();
  m.inertia = Vec3(mass / 12.0 * (b * b + c * c),
                   mass / 12.0 * (a * a + c * c),
                   mass / 12.0 * (a * a + b * b))
                  .asDiagonal();
  m.friction_mu = mu;
  return m;
}

Mat3 euler_zyx_to_rotation(const Vec3& a) {
  const Real cz = std::cos(a(0)), sz = std::sin(a(0));
  const Real cy = std::cos(a(1)), sy = std::sin(a(1));
  const Real cx = std::cos(a(2)), sx = std::sin(a(2));
  Mat3 rz, ry, rx;
  rz << cz, -sz, 0, sz, cz, 0, 0, 0, 1;
  ry << cy, 0, sy, 0, 1, 0, -sy, 0, cy;
  rx << 1, 0, 0, 0, cx, -sx, 0, sx, cx;
  return rz * ry * rx;
}

Mat3 euler_zyx_kinematic_map(const Vec3& a) {
  // omega = yaw' * z + pitch' * Rz*y + roll' * Rz*Ry*x, columns assembled below.
  const Real cz = std::cos(a(0)), sz = std::sin(a(0));
  const Real cy = std::cos(a(1)), sy = std::sin(a(1));
  Mat3 t;
  t.col(0) = Vec3(0, 0, 1);
  t.col(1) = Vec3(-sz, cz, 0);
  t.col(2) = Vec3(cz * cy, sz * cy, -sy);
  return t;
}

Vec3 angular_velocity_to_euler_rates(const Vec3& a, const Vec3& omega) {
  if (std::abs(std::abs(a(1)) - kPi / 2.0) < kPitchSingularityEps) {
    throw SingularOrientation("pitch within " + std::to_string(kPitchSingularityEps) +
                              " rad of the ZYX singularity");
  }
  return euler_zyx_kinematic_map(a).partialPivLu().solve(omega);
}

Mat3 world_inertia(const ObjectModel& model, const Vec3& angles_zyx) {
  const Mat3 r = euler_zyx_to_rotation(angles_zyx);
  return r * model.inertia * r.transpose();
}

namespace {

struct RotState {
  Vec3 angles;
  Vec3 omega;
};

// d/dt of (angles, omega) for torque-free motion; inertia rotated with the body.
RotState rot_derivative(const RotState& s, const ObjectModel& model) {
  const Mat3 iw = world_inertia(model, s.angles);
  RotState d;
  d.angles = angular_velocity_to_euler_rates(s.angles, s.omega);
  d.omega = iw.partialPivLu().solve(-s.omega.cross(iw * s.omega));
  return d;
}

}  // namespace

RigidBodyState integrate_free_rigid_body(const RigidBodyState& state,
                                         const ObjectModel& model,
                                         const Vec3& gravity, Real dt) {
  RigidBodyState next = state;
  next.position = state.position + state.lin_vel * dt + 0.5 * gravity * dt * dt;
  next.lin_vel = state.lin_vel + gravity * dt;

  RotState s{state.orientation_zyx, state.ang_vel};
  const RotState k1 = rot_derivative(s, model);
  const RotState s2{s.angles + 0.5 * dt * k1.angles, s.omega + 0.5 * dt * k1.omega};
  const RotState k2 = rot_derivative(s2, model);
  const RotState s3{s.angles + 0.5 * dt * k2.angles, s.omega + 0.5 * dt * k2.omega};
  const RotState k3 = rot_derivative(s3, model);
  const RotState s4{s.angles + dt * k3.angles, s.omega + dt * k3.omega};
  const RotState k4 = rot_derivative(s4, model);

  next.orientation_zyx =
      s.angles + dt / 6.0 * (k1.angles + 2.0 * k2.angles + 2.0 * k3.angles + k4.angles);
  next.ang_vel = s.omega + dt / 6.0 * (k1.omega + 2.0 * k2.omega + 2.0 * k3.omega + k4.omega);
  return next;
}

}  // namespace bicatch
