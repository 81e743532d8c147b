#pragma once

// Multi-Mode Trajectory Optimization: direct transcription of the hybrid
// catching problem over a fixed mode schedule, with mode-dependent dynamics,
// control and coupling constraints. Produces synchronized end-effector
// motion, normal-force and stiffness profiles.

#include <optional>
#include <string>
#include <vector>

#include "bicatch/al_solver.hpp"
#include "bicatch/nlp.hpp"
#include "bicatch/rigid_body.hpp"
#include "bicatch/types.hpp"

namespace bicatch::mmto {

enum class DynMode { FreeMotion = 0, Contact = 1 };
enum class CtrlMode { Compression = -1, None = 0, Restitution = 1 };
enum class PlanMode { Decoupled = 0, Coupled = 1 };

struct ModeTuple {
  DynMode dyn = DynMode::FreeMotion;
  CtrlMode ctrl = CtrlMode::None;
  PlanMode plan = PlanMode::Decoupled;

  bool valid() const {
    const bool ctrl_ok = (ctrl != CtrlMode::None) == (dyn == DynMode::Contact);
    const bool plan_ok = plan == PlanMode::Decoupled || dyn == DynMode::Contact;
    return ctrl_ok && plan_ok;
  }

  static ModeTuple free_motion() { return {}; }
  static ModeTuple soft_contact() {
    return {DynMode::Contact, CtrlMode::Compression, PlanMode::Coupled};
  }
  static ModeTuple stiff_contact() {
    return {DynMode::Contact, CtrlMode::Restitution, PlanMode::Coupled};
  }
};

// Per-knot view of the decision variables (per-arm vectors sized `arms`).
struct KnotVars {
  Vec6 x_obj = Vec6::Zero();     // pose (position, euler zyx)
  Vec6 xdot_obj = Vec6::Zero();  // twist (v, omega), world
  std::vector<Vec3> x_ee;
  std::vector<Vec3> xdot_ee;
  std::vector<Real> f_normal;  // >= 0
  std::vector<Real> fdot;
  std::vector<Vec2> f_tan;
  std::vector<Real> alpha;     // per arm, the knot's contact-phase alpha
  Real dt = 0.0;               // duration to the next knot
};

struct ContactSpec {
  Vec3 point_body = Vec3::Zero();    // contact point relative to CoM, body frame
  Vec3 normal_body = Vec3::UnitZ();  // outward surface normal, body frame
  Vec3 tan1_body = Vec3::UnitX();    // tangent basis for the tangential force
  Vec3 tan2_body = Vec3::UnitY();

  static ContactSpec from_normal(const Vec3& point_body, const Vec3& normal_body);

  // World-frame contact point / force given the object pose and force coords.
  Vec3 point_world(const Vec6& obj_pose) const;
  // Force on the object: -n * f_normal + t1 * f_tan(0) + t2 * f_tan(1).
  Vec3 force_world(const Vec6& obj_pose, Real f_normal, const Vec2& f_tan) const;
};

enum class TerminalKind { RestOnly, RestAtPose };

struct Scenario {
  ObjectModel object;
  RigidBodyState object_initial;
  std::vector<Vec3> ee_initial_pos;   // one per arm
  std::vector<Vec3> ee_initial_vel;
  std::vector<ContactSpec> contacts;  // one per arm
  std::vector<ModeTuple> modes;       // one per knot, monotone free -> contact
  std::vector<Real> dt_lower;         // one per interval
  std::vector<Real> dt_upper;
  TerminalKind terminal = TerminalKind::RestOnly;
  Vec6 terminal_pose = Vec6::Zero();  // used when terminal == RestAtPose
  std::vector<Vec3> workspace_centers;  // one per arm
  Real workspace_radius = 0.9;
  Real friction_mu = 0.5;
  Vec3 gravity = Vec3(0, 0, -9.81);

  int num_knots() const { return static_cast<int>(modes.size()); }
  int num_arms() const { return static_cast<int>(ee_initial_pos.size()); }
  // Throws InvalidModeSequence on malformed schedules.
  void validate() const;

  // 4 free / 4 soft / 4 stiff knots with the standard dT bounds.
  static std::vector<ModeTuple> standard_mode_sequence();
};

struct MmtoConfig {
  Real weight_force = 1e-4;
  Real weight_alpha_sq = 1e-2;
  Real weight_ee_vel = 1.0;
  Real alpha_min = 0.5;   // [1/s]
  Real alpha_max = 40.0;
  Real f_normal_max = 500.0;  // [N]
  Real desired_mass = 4.0;    // [kg], for the (K, B) extraction
  Real friction_smoothing = 1e-6;  // [N]
  bool impact_aware = true;   // false: drop the force-transmission model
  bool allow_velocity_jump = true;  // false: velocity continuity at transitions
  SolveOptions solver;
};

// Variable layout of the flat decision vector.
class VarLayout {
 public:
  VarLayout() = default;
  VarLayout(int knots, int arms, bool impact_aware);

  int obj_pose(int n) const { return n * per_knot_; }
  int obj_twist(int n) const { return n * per_knot_ + 6; }
  int ee_pos(int n, int a) const { return n * per_knot_ + 12 + a * 10; }
  int ee_vel(int n, int a) const { return n * per_knot_ + 12 + a * 10 + 3; }
  int f_normal(int n, int a) const { return n * per_knot_ + 12 + a * 10 + 6; }
  int f_dot(int n, int a) const { return n * per_knot_ + 12 + a * 10 + 7; }
  int f_tan(int n, int a) const { return n * per_knot_ + 12 + a * 10 + 8; }
  int dt(int interval) const { return knots_ * per_knot_ + interval; }
  // phase: 0 = compression/soft, 1 = restitution/stiff.
  int alpha(int phase, int a) const {
    return knots_ * per_knot_ + (knots_ - 1) + (phase * arms_ + a) * 2;
  }
  int f_target(int phase, int a) const { return alpha(phase, a) + 1; }

  int knots() const { return knots_; }
  int arms() const { return arms_; }
  bool impact_aware() const { return aware_; }
  int total() const {
    return knots_ * per_knot_ + (knots_ - 1) + (aware_ ? 2 * arms_ * 2 : 0);
  }

  KnotVars knot(const VecX& x, int n, const std::vector<ModeTuple>& modes) const;

 private:
  int knots_ = 0;
  int arms_ = 0;
  bool aware_ = true;
  int per_knot_ = 0;
};

// ---- Defect functions (also used directly by the tests) ----

// Trapezoidal Newton-Euler defect over one interval; per-knot accelerations
// use that knot's dynamics mode (wrench terms only in contact).
Eigen::Matrix<Real, 12, 1> object_dynamics_defect(
    const KnotVars& k, const KnotVars& k_next, ModeTuple mode, ModeTuple mode_next,
    const ObjectModel& model, const Vec3& gravity,
    const std::vector<ContactSpec>& contacts);

// Per-arm 6-vector: position rows use the velocity trapezoid within a
// constant dynamics mode and a left-velocity Euler step across a transition
// (velocity rows omitted there, admitting the jump).
Vec6 ee_motion_defect(const KnotVars& k, const KnotVars& k_next, ModeTuple mode_now,
                      ModeTuple mode_next, int arm);

// Trapezoidal defect of the 2-state critically damped force system toward
// f_target; at free-motion knots the residual pins f = fdot = 0.
Vec2 force_dynamics_defect(const KnotVars& k, const KnotVars& k_next,
                           ModeTuple mode, Real f_target, int arm);

// ||f_tan|| - mu f_normal (exact form; feasible iff <= 0).
Real friction_cone_residual(Real f_normal, const Vec2& f_tan, Real mu);
// sqrt(||f_tan||^2 + eps^2) - mu f_normal, the smooth variant the solver uses.
Real friction_cone_smoothed(Real f_normal, const Vec2& f_tan, Real mu, Real eps);

// Coupled: x_ee - (object position + R * point_body); Decoupled: -signed
// distance of the end-effector from the transported contact plane (<= 0 when
// outside).
Vec3 coupling_residual_coupled(const Vec3& x_ee, const Vec6& obj_pose,
                               const ContactSpec& contact);
Real clearance_residual_decoupled(const Vec3& x_ee, const Vec6& obj_pose,
                                  const ContactSpec& contact);

// ---- Transcription, solve, extraction ----

struct TranscribedProblem {
  TranscribedNLP nlp;
  VarLayout layout;
  Scenario scenario;  // copy, for extraction and audits
  MmtoConfig config;
};

TranscribedProblem build_problem(const Scenario& scenario, const MmtoConfig& cfg);

// Straight-line / ballistic / analytic-force initial guess.
VecX initial_guess(const TranscribedProblem& problem);

struct PlanKnot {
  Real t = 0.0;
  Vec6 obj_pose = Vec6::Zero();
  Vec6 obj_twist = Vec6::Zero();
  std::vector<Vec3> ee_pos;
  std::vector<Vec3> ee_vel;
  std::vector<Real> f_normal;
  std::vector<Vec3> f_world;    // full planned contact force on the object
  std::vector<Real> stiffness;  // K, 0 outside contact
  std::vector<Real> damping;    // B
  bool in_contact = false;
};

struct Plan {
  std::vector<PlanKnot> knots;
  std::vector<Real> alpha_soft;   // per arm (empty when impact-agnostic)
  std::vector<Real> alpha_stiff;
  SolveStatus status = SolveStatus::MaxIter;
  Real objective = 0.0;
  Real max_violation = 0.0;
  int outer_iterations = 0;
  int inner_iterations = 0;
};

SolveResult solve(const TranscribedProblem& problem, const VecX& init);
Plan extract_plan(const TranscribedProblem& problem, const SolveResult& result);

}  // namespace bicatch::mmto
