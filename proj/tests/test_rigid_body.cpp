#include <doctest.h>

#include <cmath>
#include <random>

#include "bicatch/rigid_body.hpp"

using namespace bicatch;

namespace {

Mat3 axis_rotation(int axis, Real angle) {
  Mat3 r = Mat3::Identity();
  const Real c = std::cos(angle), s = std::sin(angle);
  const int i = (axis + 1) % 3, j = (axis + 2) % 3;
  r(i, i) = c;
  r(i, j) = -s;
  r(j, i) = s;
  r(j, j) = c;
  return r;
}

}  // namespace

TEST_CASE("skew matrix reproduces the cross product") {
  CHECK(skew(Vec3::Zero()).isZero(0.0));
  CHECK((skew(Vec3::UnitX()) * Vec3::UnitY() - Vec3::UnitZ()).norm() == 0.0);

  std::mt19937 rng(11);
  std::uniform_real_distribution<Real> u(-2.0, 2.0);
  for (int i = 0; i < 50; ++i) {
    const Vec3 r(u(rng), u(rng), u(rng)), v(u(rng), u(rng), u(rng));
    CHECK((skew(r) * v - r.cross(v)).cwiseAbs().maxCoeff() <= 1e-14);
  }
}

TEST_CASE("euler_zyx_to_rotation basics") {
  CHECK((euler_zyx_to_rotation(Vec3::Zero()) - Mat3::Identity()).norm() <= 1e-15);

  // Quarter turn about z maps x to y.
  const Mat3 r = euler_zyx_to_rotation(Vec3(kPi / 2.0, 0, 0));
  CHECK((r * Vec3::UnitX() - Vec3::UnitY()).norm() <= 1e-12);

  // Composition oracle: Rz(0.3) * Ry(-0.2) * Rx(0.1) assembled independently.
  const Mat3 expected =
      axis_rotation(2, 0.3) * axis_rotation(1, -0.2) * axis_rotation(0, 0.1);
  const Mat3 got = euler_zyx_to_rotation(Vec3(0.3, -0.2, 0.1));
  CHECK((got - expected).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("rotation matrices are orthonormal with determinant +1") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<Real> u(-1.4, 1.4);
  for (int i = 0; i < 100; ++i) {
    const Mat3 r = euler_zyx_to_rotation(Vec3(u(rng), u(rng), u(rng)));
    CHECK((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("angular velocity to euler rates") {
  // Aligned frames: yaw rate picks up omega_z, roll rate picks up omega_x.
  CHECK((angular_velocity_to_euler_rates(Vec3::Zero(), Vec3(0, 0, 1)) -
         Vec3(1, 0, 0)).norm() <= 1e-12);
  CHECK((angular_velocity_to_euler_rates(Vec3::Zero(), Vec3(1, 0, 0)) -
         Vec3(0, 0, 1)).norm() <= 1e-12);

  // Kinematic-map residual on random configurations.
  std::mt19937 rng(7);
  std::uniform_real_distribution<Real> u(-1.2, 1.2);
  for (int i = 0; i < 50; ++i) {
    const Vec3 angles(u(rng), u(rng), u(rng));
    const Vec3 omega(u(rng), u(rng), u(rng));
    const Vec3 rates = angular_velocity_to_euler_rates(angles, omega);
    CHECK((euler_zyx_kinematic_map(angles) * rates - omega).norm() <= 1e-10);
  }

  // Finite-difference oracle: step the angles along the rates and recover
  // omega from the rotation increment.
  const Vec3 angles(0.2, 0.4, -0.1);
  const Vec3 omega(0.5, -0.3, 0.8);
  const Vec3 rates = angular_velocity_to_euler_rates(angles, omega);
  const Real h = 1e-7;
  const Mat3 r0 = euler_zyx_to_rotation(angles);
  const Mat3 r1 = euler_zyx_to_rotation(angles + h * rates);
  const Mat3 omega_hat = (r1 - r0) / h * r0.transpose();
  const Vec3 omega_rec(omega_hat(2, 1), omega_hat(0, 2), omega_hat(1, 0));
  CHECK((omega_rec - omega).norm() <= 1e-6);

  CHECK_THROWS_AS(
      angular_velocity_to_euler_rates(Vec3(0, kPi / 2.0 - 1e-4, 0), Vec3(1, 1, 1)),
      SingularOrientation);
}

TEST_CASE("free rigid body: equilibrium and ballistic update") {
  const ObjectModel model = ObjectModel::box(4.2, Vec3(0.55, 0.40, 0.42));
  RigidBodyState s;

  SUBCASE("zero velocities, zero gravity") {
    const auto next = integrate_free_rigid_body(s, model, Vec3::Zero(), 0.5);
    CHECK((next.position - s.position).norm() == 0.0);
    CHECK((next.orientation_zyx - s.orientation_zyx).norm() == 0.0);
  }

  SUBCASE("closed-form ballistic translation") {
    s.lin_vel = Vec3(0, 3.5, 2.0);
    const auto next =
        integrate_free_rigid_body(s, model, Vec3(0, 0, -9.81), 0.03);
    CHECK(next.position.y() == doctest::Approx(0.105).epsilon(1e-12));
    CHECK(next.position.z() == doctest::Approx(0.0555855).epsilon(1e-6));
    CHECK(next.lin_vel.z() == doctest::Approx(1.7057).epsilon(1e-12));
  }

  SUBCASE("principal-axis spin stays constant") {
    s.ang_vel = Vec3(0, 0, 2.0);
    RigidBodyState cur = s;
    for (int i = 0; i < 100; ++i) {
      cur = integrate_free_rigid_body(cur, model, Vec3::Zero(), 1e-3);
    }
    CHECK((cur.ang_vel - s.ang_vel).norm() <= 1e-10);
  }
}

TEST_CASE("free rotation conserves energy and angular momentum") {
  ObjectModel model;
  model.mass = 1.0;
  model.inertia = Vec3(0.1, 0.25, 0.4).asDiagonal();  // asymmetric body

  RigidBodyState s;
  s.orientation_zyx = Vec3(0.2, 0.1, -0.3);
  s.ang_vel = Vec3(1.1, -0.7, 0.5);

  const Mat3 iw0 = world_inertia(model, s.orientation_zyx);
  const Vec3 l0 = iw0 * s.ang_vel;
  const Real e0 = 0.5 * s.ang_vel.dot(l0);

  RigidBodyState cur = s;
  for (int i = 0; i < 1000; ++i) {
    cur = integrate_free_rigid_body(cur, model, Vec3::Zero(), 1e-3);
  }
  const Mat3 iw1 = world_inertia(model, cur.orientation_zyx);
  const Vec3 l1 = iw1 * cur.ang_vel;
  const Real e1 = 0.5 * cur.ang_vel.dot(l1);

  CHECK((l1 - l0).norm() / l0.norm() <= 1e-6);
  CHECK(std::abs(e1 - e0) / e0 <= 1e-6);
}

TEST_CASE("single-step angular momentum conservation") {
  ObjectModel model;
  model.inertia = Vec3(0.12, 0.3, 0.21).asDiagonal();
  RigidBodyState s;
  s.orientation_zyx = Vec3(0.4, -0.2, 0.15);
  s.ang_vel = Vec3(0.9, 0.4, -1.2);

  const Vec3 l0 = world_inertia(model, s.orientation_zyx) * s.ang_vel;
  const auto next = integrate_free_rigid_body(s, model, Vec3::Zero(), 1e-3);
  const Vec3 l1 = world_inertia(model, next.orientation_zyx) * next.ang_vel;
  CHECK((l1 - l0).norm() / l0.norm() <= 1e-8);
}

TEST_CASE("translation is exact to integrator order (Richardson check)") {
  const ObjectModel model = ObjectModel::box(1.0, Vec3(0.2, 0.2, 0.2));
  RigidBodyState s;
  s.lin_vel = Vec3(1.0, -0.4, 2.0);
  const Vec3 g(0, 0, -9.81);
  const Real t_final = 0.48;

  // Closed-form translation: any step size reproduces the projectile exactly.
  for (int steps : {3, 6, 12}) {
    RigidBodyState cur = s;
    const Real dt = t_final / steps;
    for (int i = 0; i < steps; ++i) cur = integrate_free_rigid_body(cur, model, g, dt);
    const Vec3 expected = s.position + s.lin_vel * t_final + 0.5 * g * t_final * t_final;
    CHECK((cur.position - expected).norm() <= 1e-12);
  }
}

TEST_CASE("object model validation") {
  ObjectModel m = ObjectModel::box(4.2, Vec3(0.55, 0.40, 0.42));
  CHECK(m.valid());
  m.mass = -1.0;
  CHECK_FALSE(m.valid());
  m = ObjectModel::box(4.2, Vec3(0.55, 0.40, 0.42));
  m.inertia(0, 1) = 0.3;  // asymmetric
  CHECK_FALSE(m.valid());
  m = ObjectModel::box(4.2, Vec3(0.55, 0.40, 0.42));
  m.friction_mu = -0.1;
  CHECK_FALSE(m.valid());
}
