#include "bicatch/estimate.hpp"

#include <cmath>
#include <limits>

namespace bicatch::est {

namespace {

Real wrap_angle(Real a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a <= 0.0) a += 2.0 * kPi;
  return a - kPi;
}

RigidBodyState tether_project(const RigidBodyState& s, const TetherSpec& tether) {
  RigidBodyState out = s;
  const Vec3 radial = s.position - tether.anchor;
  const Real dist = radial.norm();
  if (dist < 1e-12) return out;
  const Vec3 r_hat = radial / dist;
  out.position = tether.anchor + tether.length * r_hat;
  out.lin_vel = s.lin_vel - s.lin_vel.dot(r_hat) * r_hat;
  return out;
}

// Constant-twist + gravity step, optionally projected onto the tether.
Vec12 propagate_mean(const Vec12& mean, const Vec3& gravity, Real dt,
                     const Environment& env) {
  const Vec3 angles = mean.segment<3>(3);
  const Vec3 omega = mean.segment<3>(9);
  Vec12 next = mean;
  next.segment<3>(0) += mean.segment<3>(6) * dt + 0.5 * gravity * dt * dt;
  next.segment<3>(3) += angular_velocity_to_euler_rates(angles, omega) * dt;
  next.segment<3>(6) += gravity * dt;
  if (env.kind == EnvironmentKind::Tethered) {
    RigidBodyState s;
    s.position = next.segment<3>(0);
    s.lin_vel = next.segment<3>(6);
    s = tether_project(s, env.tether);
    next.segment<3>(0) = s.position;
    next.segment<3>(6) = s.lin_vel;
  }
  return next;
}

}  // namespace

RigidBodyState EkfState::to_rigid_body() const {
  RigidBodyState s;
  s.position = mean.segment<3>(0);
  s.orientation_zyx = mean.segment<3>(3);
  s.lin_vel = mean.segment<3>(6);
  s.ang_vel = mean.segment<3>(9);
  return s;
}

EkfState EkfState::from_pose(const Vec6& pose, Real pos_var, Real ang_var,
                             Real vel_var, Real omega_var) {
  EkfState s;
  s.mean.segment<6>(0) = pose;
  s.covariance.setZero();
  s.covariance.diagonal().segment<3>(0).setConstant(pos_var);
  s.covariance.diagonal().segment<3>(3).setConstant(ang_var);
  s.covariance.diagonal().segment<3>(6).setConstant(vel_var);
  s.covariance.diagonal().segment<3>(9).setConstant(omega_var);
  return s;
}

Mat12 EkfNoise::to_matrix() const {
  Mat12 q = Mat12::Zero();
  q.diagonal().segment<3>(0).setConstant(q_pos);
  q.diagonal().segment<3>(3).setConstant(q_ang);
  q.diagonal().segment<3>(6).setConstant(q_vel);
  q.diagonal().segment<3>(9).setConstant(q_omega);
  return q;
}

EkfState ekf_predict(const EkfState& s, const ObjectModel& model,
                     const Vec3& gravity, Real dt, const EkfNoise& noise,
                     const Environment& env) {
  (void)model;  // kinematic model; inertia not used for estimation
  EkfState next = s;
  next.mean = propagate_mean(s.mean, gravity, dt, env);

  // Transition Jacobian differenced through the full (possibly projected)
  // step; the step is cheap and this keeps the two consistent.
  Mat12 f;
  Vec12 probe = s.mean;
  for (int j = 0; j < 12; ++j) {
    const Real h = 1e-6 * std::max(1.0, std::abs(s.mean(j)));
    probe(j) = s.mean(j) + h;
    const Vec12 plus = propagate_mean(probe, gravity, dt, env);
    probe(j) = s.mean(j) - h;
    const Vec12 minus = propagate_mean(probe, gravity, dt, env);
    probe(j) = s.mean(j);
    f.col(j) = (plus - minus) / (2.0 * h);
  }

  next.covariance = f * s.covariance * f.transpose() + noise.to_matrix() * dt;
  next.covariance = 0.5 * (next.covariance + next.covariance.transpose()).eval();
  return next;
}

EkfState ekf_update(const EkfState& s, const Vec6& pose_meas, const Mat6& r_meas) {
  Eigen::Matrix<Real, 6, 12> h = Eigen::Matrix<Real, 6, 12>::Zero();
  h.block<6, 6>(0, 0).setIdentity();

  Vec6 innovation = pose_meas - s.mean.segment<6>(0);
  for (int i = 3; i < 6; ++i) innovation(i) = wrap_angle(innovation(i));

  const Mat6 s_mat = h * s.covariance * h.transpose() + r_meas;
  const Eigen::Matrix<Real, 12, 6> k =
      s.covariance * h.transpose() * s_mat.ldlt().solve(Mat6::Identity());

  EkfState next = s;
  next.mean += k * innovation;
  const Mat12 ikh = Mat12::Identity() - k * h;
  next.covariance = ikh * s.covariance * ikh.transpose() +
                    k * r_meas * k.transpose();
  next.covariance = 0.5 * (next.covariance + next.covariance.transpose()).eval();
  return next;
}

void MeasurementQueue::push(Real t, const Vec6& pose) {
  if (buffer_.size() == capacity_) buffer_.pop_front();
  buffer_.emplace_back(t, pose);
}

std::vector<std::pair<Real, Vec6>> MeasurementQueue::drain() {
  std::vector<std::pair<Real, Vec6>> out(buffer_.begin(), buffer_.end());
  buffer_.clear();
  return out;
}

PredictedTrajectory predict_trajectory(const RigidBodyState& state,
                                       const ObjectModel& model,
                                       const Environment& env, int n_knots,
                                       Real dt, const Vec3& gravity,
                                       int substeps) {
  PredictedTrajectory traj;
  traj.environment = env;
  traj.times.reserve(n_knots + 1);
  traj.states.reserve(n_knots + 1);

  RigidBodyState s = state;
  if (env.kind == EnvironmentKind::Tethered) s = tether_project(s, env.tether);
  traj.times.push_back(0.0);
  traj.states.push_back(s);

  const Real h = dt / substeps;
  for (int k = 1; k <= n_knots; ++k) {
    for (int i = 0; i < substeps; ++i) {
      s = integrate_free_rigid_body(s, model, gravity, h);
      if (env.kind == EnvironmentKind::Tethered) s = tether_project(s, env.tether);
    }
    traj.times.push_back(k * dt);
    traj.states.push_back(s);
  }
  return traj;
}

std::pair<int, RigidBodyState> select_catch_pose(const PredictedTrajectory& traj,
                                                 const Vec3& workspace_center,
                                                 Real workspace_radius) {
  int best = -1;
  Real best_dist = std::numeric_limits<Real>::infinity();
  for (size_t i = 0; i < traj.states.size(); ++i) {
    const Real dist = (traj.states[i].position - workspace_center).norm();
    if (dist <= workspace_radius && dist < best_dist) {
      best_dist = dist;
      best = static_cast<int>(i);
    }
  }
  if (best < 0) {
    throw NoIntersection("predicted trajectory never enters the workspace sphere");
  }
  return {best, traj.states[best]};
}

}  // namespace bicatch::est
