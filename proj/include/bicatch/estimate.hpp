#pragma once

// EKF velocity estimation from pose measurements, IVP trajectory prediction
// for free-flying and tethered objects, and catch-pose selection.

#include <deque>
#include <utility>
#include <vector>

#include "bicatch/errors.hpp"
#include "bicatch/rigid_body.hpp"
#include "bicatch/types.hpp"

namespace bicatch::est {

using Vec12 = Eigen::Matrix<Real, 12, 1>;
using Mat12 = Eigen::Matrix<Real, 12, 12>;

struct EkfState {
  Vec12 mean = Vec12::Zero();       // pose (pos, euler zyx) + twist (v, omega)
  Mat12 covariance = Mat12::Identity();

  RigidBodyState to_rigid_body() const;
  static EkfState from_pose(const Vec6& pose, Real pos_var, Real ang_var,
                            Real vel_var, Real omega_var);
};

struct EkfNoise {
  // Continuous-time process noise intensities (variance rate per second).
  Real q_pos = 1e-6;
  Real q_ang = 1e-6;
  Real q_vel = 0.2;    // absorbs residual unmodeled accelerations
  Real q_omega = 0.02;
  Mat12 to_matrix() const;
};

struct TetherSpec {
  Vec3 anchor = Vec3::Zero();
  Real length = 1.0;
};

enum class EnvironmentKind { FreeFlight, Tethered };

struct Environment {
  EnvironmentKind kind = EnvironmentKind::FreeFlight;
  TetherSpec tether;

  static Environment free_flight() { return {}; }
  static Environment tethered(const Vec3& anchor, Real length) {
    return {EnvironmentKind::Tethered, {anchor, length}};
  }
};

// Constant-twist + gravity process model; covariance via linearized
// transition, symmetrized to stay PSD. When a tethered environment is given,
// the propagated mean is projected onto the tether constraint (the same
// projection the trajectory predictor uses) and the transition Jacobian is
// differenced through the projected step; without it the gravity-only model
// cannot track a swinging stream (the tension is a ~1 g model error).
EkfState ekf_predict(const EkfState& s, const ObjectModel& model,
                     const Vec3& gravity, Real dt, const EkfNoise& noise,
                     const Environment& env = Environment::free_flight());

// Pose measurement update (position + ZYX angles). Angle innovations are
// wrapped to (-pi, pi]. Joseph-form covariance update.
EkfState ekf_update(const EkfState& s, const Vec6& pose_meas, const Mat6& r_meas);

// Bounded latest-sample buffer for the measurement feed.
class MeasurementQueue {
 public:
  explicit MeasurementQueue(size_t capacity = 5) : capacity_(capacity) {}
  void push(Real t, const Vec6& pose);
  // Removes and returns all buffered samples, oldest first.
  std::vector<std::pair<Real, Vec6>> drain();
  size_t size() const { return buffer_.size(); }

 private:
  size_t capacity_;
  std::deque<std::pair<Real, Vec6>> buffer_;
};

struct PredictedTrajectory {
  std::vector<Real> times;
  std::vector<RigidBodyState> states;
  Environment environment;
};

// Forward IVP integration, n_knots steps of dt. Tethered motion projects the
// position back to the tether sphere and the velocity to its tangent plane
// after every substep.
PredictedTrajectory predict_trajectory(const RigidBodyState& state,
                                       const ObjectModel& model,
                                       const Environment& env, int n_knots = 60,
                                       Real dt = 0.03,
                                       const Vec3& gravity = Vec3(0, 0, -9.81),
                                       int substeps = 5);

// Knot closest to the workspace center among knots inside the sphere.
// Throws NoIntersection when the trajectory never enters it.
std::pair<int, RigidBodyState> select_catch_pose(const PredictedTrajectory& traj,
                                                 const Vec3& workspace_center,
                                                 Real workspace_radius);

}  // namespace bicatch::est
