#include "bicatch/mmto.hpp"

#include <cmath>

#include "bicatch/errors.hpp"
#include "bicatch/force_model.hpp"
#include "bicatch/mesh.hpp"

namespace bicatch::mmto {

// ---------------------------------------------------------------------------
// Contacts and scenario
// ---------------------------------------------------------------------------

ContactSpec ContactSpec::from_normal(const Vec3& point_body, const Vec3& normal_body) {
  ContactSpec c;
  c.point_body = point_body;
  c.normal_body = normal_body.normalized();
  geom::tangent_frame(c.normal_body, c.tan1_body, c.tan2_body);
  return c;
}

Vec3 ContactSpec::point_world(const Vec6& obj_pose) const {
  const Mat3 r = euler_zyx_to_rotation(obj_pose.segment<3>(3));
  return obj_pose.segment<3>(0) + r * point_body;
}

Vec3 ContactSpec::force_world(const Vec6& obj_pose, Real f_normal,
                              const Vec2& f_tan) const {
  const Mat3 r = euler_zyx_to_rotation(obj_pose.segment<3>(3));
  return r * (-normal_body * f_normal + tan1_body * f_tan(0) + tan2_body * f_tan(1));
}

std::vector<ModeTuple> Scenario::standard_mode_sequence() {
  std::vector<ModeTuple> modes;
  for (int i = 0; i < 4; ++i) modes.push_back(ModeTuple::free_motion());
  for (int i = 0; i < 4; ++i) modes.push_back(ModeTuple::soft_contact());
  for (int i = 0; i < 4; ++i) modes.push_back(ModeTuple::stiff_contact());
  return modes;
}

void Scenario::validate() const {
  const int n = num_knots();
  if (n < 2) throw InvalidModeSequence("need at least two knots");
  if (num_arms() < 1) throw InvalidModeSequence("need at least one arm");
  if (static_cast<int>(contacts.size()) != num_arms() ||
      static_cast<int>(ee_initial_vel.size()) != num_arms() ||
      static_cast<int>(workspace_centers.size()) != num_arms()) {
    throw InvalidModeSequence("per-arm data sizes disagree");
  }
  if (static_cast<int>(dt_lower.size()) != n - 1 ||
      static_cast<int>(dt_upper.size()) != n - 1) {
    throw InvalidModeSequence("need one dT bound pair per interval");
  }
  bool seen_contact = false;
  for (int i = 0; i < n; ++i) {
    if (!modes[i].valid()) {
      throw InvalidModeSequence("mode tuple invalid at knot " + std::to_string(i));
    }
    const bool contact = modes[i].dyn == DynMode::Contact;
    if (seen_contact && !contact) {
      throw InvalidModeSequence("re-separation after contact is not allowed");
    }
    seen_contact = seen_contact || contact;
  }
  for (int i = 0; i + 1 < n; ++i) {
    if (!(dt_lower[i] > 0.0) || dt_lower[i] > dt_upper[i]) {
      throw InvalidModeSequence("bad dT bounds at interval " + std::to_string(i));
    }
  }
}

// ---------------------------------------------------------------------------
// Variable layout
// ---------------------------------------------------------------------------

VarLayout::VarLayout(int knots, int arms, bool impact_aware)
    : knots_(knots), arms_(arms), aware_(impact_aware), per_knot_(12 + arms * 10) {}

KnotVars VarLayout::knot(const VecX& x, int n,
                         const std::vector<ModeTuple>& modes) const {
  KnotVars k;
  k.x_obj = x.segment<6>(obj_pose(n));
  k.xdot_obj = x.segment<6>(obj_twist(n));
  k.x_ee.resize(arms_);
  k.xdot_ee.resize(arms_);
  k.f_normal.resize(arms_);
  k.fdot.resize(arms_);
  k.f_tan.resize(arms_);
  k.alpha.assign(arms_, 0.0);
  for (int a = 0; a < arms_; ++a) {
    k.x_ee[a] = x.segment<3>(ee_pos(n, a));
    k.xdot_ee[a] = x.segment<3>(ee_vel(n, a));
    k.f_normal[a] = x(f_normal(n, a));
    k.fdot[a] = x(f_dot(n, a));
    k.f_tan[a] = x.segment<2>(f_tan(n, a));
    if (aware_ && modes[n].ctrl != CtrlMode::None) {
      const int phase = modes[n].ctrl == CtrlMode::Compression ? 0 : 1;
      k.alpha[a] = x(alpha(phase, a));
    }
  }
  if (n + 1 < knots_) k.dt = x(dt(n));
  return k;
}

// ---------------------------------------------------------------------------
// Defect functions
// ---------------------------------------------------------------------------

namespace {

// Linear and angular acceleration at one knot under its dynamics mode.
void knot_accelerations(const KnotVars& k, ModeTuple mode, const ObjectModel& model,
                        const Vec3& gravity, const std::vector<ContactSpec>& contacts,
                        Vec3& lin_acc, Vec3& ang_acc) {
  Vec3 force_sum = Vec3::Zero();
  Vec3 torque_sum = Vec3::Zero();
  if (mode.dyn == DynMode::Contact) {
    const Mat3 r = euler_zyx_to_rotation(k.x_obj.segment<3>(3));
    for (size_t a = 0; a < contacts.size(); ++a) {
      const Vec3 f = contacts[a].force_world(k.x_obj, k.f_normal[a], k.f_tan[a]);
      force_sum += f;
      torque_sum += (r * contacts[a].point_body).cross(f);
    }
  }
  lin_acc = gravity + force_sum / model.mass;
  const Mat3 iw = world_inertia(model, k.x_obj.segment<3>(3));
  const Vec3 omega = k.xdot_obj.segment<3>(3);
  ang_acc = iw.partialPivLu().solve(torque_sum - omega.cross(iw * omega));
}

}  // namespace

Eigen::Matrix<Real, 12, 1> object_dynamics_defect(
    const KnotVars& k, const KnotVars& k_next, ModeTuple mode, ModeTuple mode_next,
    const ObjectModel& model, const Vec3& gravity,
    const std::vector<ContactSpec>& contacts) {
  const Real dt = k.dt;
  Eigen::Matrix<Real, 12, 1> r;

  const Vec3 rates0 =
      angular_velocity_to_euler_rates(k.x_obj.segment<3>(3), k.xdot_obj.segment<3>(3));
  const Vec3 rates1 = angular_velocity_to_euler_rates(k_next.x_obj.segment<3>(3),
                                                      k_next.xdot_obj.segment<3>(3));
  Vec3 lin0, ang0, lin1, ang1;
  knot_accelerations(k, mode, model, gravity, contacts, lin0, ang0);
  knot_accelerations(k_next, mode_next, model, gravity, contacts, lin1, ang1);

  r.segment<3>(0) = k_next.x_obj.segment<3>(0) - k.x_obj.segment<3>(0) -
                    0.5 * dt * (k.xdot_obj.segment<3>(0) + k_next.xdot_obj.segment<3>(0));
  r.segment<3>(3) = k_next.x_obj.segment<3>(3) - k.x_obj.segment<3>(3) -
                    0.5 * dt * (rates0 + rates1);
  r.segment<3>(6) =
      k_next.xdot_obj.segment<3>(0) - k.xdot_obj.segment<3>(0) - 0.5 * dt * (lin0 + lin1);
  r.segment<3>(9) =
      k_next.xdot_obj.segment<3>(3) - k.xdot_obj.segment<3>(3) - 0.5 * dt * (ang0 + ang1);
  return r;
}

Vec6 ee_motion_defect(const KnotVars& k, const KnotVars& k_next, ModeTuple mode_now,
                      ModeTuple mode_next, int arm) {
  Vec6 r = Vec6::Zero();
  const Real dt = k.dt;
  const bool transition = mode_now.dyn != mode_next.dyn;
  if (transition) {
    // Impact transition: left-velocity position step, velocity rows omitted
    // so the end-effector velocity may jump.
    r.segment<3>(0) = k_next.x_ee[arm] - k.x_ee[arm] - dt * k.xdot_ee[arm];
  } else {
    r.segment<3>(0) = k_next.x_ee[arm] - k.x_ee[arm] -
                      0.5 * dt * (k.xdot_ee[arm] + k_next.xdot_ee[arm]);
    // Velocity rows: the implied accelerations are free decision quantities,
    // so within a mode the rows close identically once positions integrate.
  }
  return r;
}

Vec2 force_dynamics_defect(const KnotVars& k, const KnotVars& k_next, ModeTuple mode,
                           Real f_target, int arm) {
  Vec2 r;
  if (mode.dyn == DynMode::FreeMotion) {
    r << k.f_normal[arm], k.fdot[arm];
    return r;
  }
  const Real dt = k.dt;
  const Real a = k.alpha[arm];
  const Real g0 = -a * a * k.f_normal[arm] - 2.0 * a * k.fdot[arm] + a * a * f_target;
  const Real g1 =
      -a * a * k_next.f_normal[arm] - 2.0 * a * k_next.fdot[arm] + a * a * f_target;
  r(0) = k_next.f_normal[arm] - k.f_normal[arm] - 0.5 * dt * (k.fdot[arm] + k_next.fdot[arm]);
  r(1) = k_next.fdot[arm] - k.fdot[arm] - 0.5 * dt * (g0 + g1);
  return r;
}

Real friction_cone_residual(Real f_normal, const Vec2& f_tan, Real mu) {
  return f_tan.norm() - mu * f_normal;
}

Real friction_cone_smoothed(Real f_normal, const Vec2& f_tan, Real mu, Real eps) {
  return std::sqrt(f_tan.squaredNorm() + eps * eps) - mu * f_normal;
}

Vec3 coupling_residual_coupled(const Vec3& x_ee, const Vec6& obj_pose,
                               const ContactSpec& contact) {
  return x_ee - contact.point_world(obj_pose);
}

Real clearance_residual_decoupled(const Vec3& x_ee, const Vec6& obj_pose,
                                  const ContactSpec& contact) {
  const Mat3 r = euler_zyx_to_rotation(obj_pose.segment<3>(3));
  const Vec3 n_world = r * contact.normal_body;
  const Real signed_distance = n_world.dot(x_ee - contact.point_world(obj_pose));
  return -signed_distance;  // feasible (<= 0) when outside the contact plane
}

// ---------------------------------------------------------------------------
// Transcription
// ---------------------------------------------------------------------------

namespace {

constexpr Real kInfBound = 1e19;

int phase_of(ModeTuple mode) {
  return mode.ctrl == CtrlMode::Restitution ? 1 : 0;
}

struct BlockBuilder {
  ConstraintBlock block;
  std::vector<int>& vars() { return block.vars; }

  int add_var(int global_index) {
    block.vars.push_back(global_index);
    return static_cast<int>(block.vars.size()) - 1;
  }
  void add_segment(int global_start, int count) {
    for (int i = 0; i < count; ++i) block.vars.push_back(global_start + i);
  }
};

}  // namespace

TranscribedProblem build_problem(const Scenario& scenario, const MmtoConfig& cfg) {
  scenario.validate();
  TranscribedProblem problem;
  problem.scenario = scenario;
  problem.config = cfg;
  const int n_knots = scenario.num_knots();
  const int arms = scenario.num_arms();
  problem.layout = VarLayout(n_knots, arms, cfg.impact_aware);
  const VarLayout& L = problem.layout;
  TranscribedNLP& nlp = problem.nlp;

  nlp.num_vars = L.total();
  nlp.lower = VecX::Constant(nlp.num_vars, -kInfBound);
  nlp.upper = VecX::Constant(nlp.num_vars, kInfBound);

  const auto& modes = scenario.modes;
  int first_contact = -1;
  for (int n = 0; n < n_knots; ++n) {
    if (modes[n].dyn == DynMode::Contact) {
      first_contact = n;
      break;
    }
  }

  // --- Variable bounds -----------------------------------------------------
  for (int n = 0; n < n_knots; ++n) {
    for (int a = 0; a < arms; ++a) {
      const bool contact = modes[n].dyn == DynMode::Contact;
      const bool pinned_zero_force =
          !contact || (cfg.impact_aware && n == first_contact);
      if (pinned_zero_force) {
        nlp.lower(L.f_normal(n, a)) = nlp.upper(L.f_normal(n, a)) = 0.0;
        nlp.lower.segment<2>(L.f_tan(n, a)).setZero();
        nlp.upper.segment<2>(L.f_tan(n, a)).setZero();
        if (!contact || cfg.impact_aware) {
          // fdot pinned at free knots; at the first contact knot the force
          // arrives at rest (zero force, zero rate).
          if (!contact || n == first_contact) {
            nlp.lower(L.f_dot(n, a)) = nlp.upper(L.f_dot(n, a)) = 0.0;
          }
        }
      } else {
        nlp.lower(L.f_normal(n, a)) = 0.0;
        nlp.upper(L.f_normal(n, a)) = cfg.f_normal_max;
        nlp.lower.segment<2>(L.f_tan(n, a)).setConstant(-cfg.f_normal_max);
        nlp.upper.segment<2>(L.f_tan(n, a)).setConstant(cfg.f_normal_max);
      }
      if (!cfg.impact_aware) {
        // No force-transmission model: the rate variables are unused.
        nlp.lower(L.f_dot(n, a)) = nlp.upper(L.f_dot(n, a)) = 0.0;
      }
    }
  }
  for (int i = 0; i + 1 < n_knots; ++i) {
    nlp.lower(L.dt(i)) = scenario.dt_lower[i];
    nlp.upper(L.dt(i)) = scenario.dt_upper[i];
  }
  if (cfg.impact_aware) {
    for (int phase = 0; phase < 2; ++phase) {
      for (int a = 0; a < arms; ++a) {
        nlp.lower(L.alpha(phase, a)) = cfg.alpha_min;
        nlp.upper(L.alpha(phase, a)) = cfg.alpha_max;
        nlp.lower(L.f_target(phase, a)) = 0.0;
        nlp.upper(L.f_target(phase, a)) = cfg.f_normal_max;
      }
    }
  }

  // Initial conditions (exact, via bounds).
  auto pin = [&](int idx, Real value) { nlp.lower(idx) = nlp.upper(idx) = value; };
  auto pin3 = [&](int idx, const Vec3& v) {
    for (int i = 0; i < 3; ++i) pin(idx + i, v(i));
  };
  pin3(L.obj_pose(0), scenario.object_initial.position);
  pin3(L.obj_pose(0) + 3, scenario.object_initial.orientation_zyx);
  pin3(L.obj_twist(0), scenario.object_initial.lin_vel);
  pin3(L.obj_twist(0) + 3, scenario.object_initial.ang_vel);
  for (int a = 0; a < arms; ++a) {
    pin3(L.ee_pos(0, a), scenario.ee_initial_pos[a]);
    pin3(L.ee_vel(0, a), scenario.ee_initial_vel[a]);
  }
  // Terminal conditions.
  const int last = n_knots - 1;
  pin3(L.obj_twist(last), Vec3::Zero());
  pin3(L.obj_twist(last) + 3, Vec3::Zero());
  if (scenario.terminal == TerminalKind::RestAtPose) {
    pin3(L.obj_pose(last), scenario.terminal_pose.segment<3>(0));
    pin3(L.obj_pose(last) + 3, scenario.terminal_pose.segment<3>(3));
  }

  // --- Constraint blocks ---------------------------------------------------
  const ObjectModel model = scenario.object;
  const Vec3 gravity = scenario.gravity;
  const auto contacts = scenario.contacts;
  const Real mu = scenario.friction_mu;
  const Real eps_f = cfg.friction_smoothing;

  // Object dynamics defects, one per interval.
  for (int n = 0; n + 1 < n_knots; ++n) {
    BlockBuilder b;
    b.block.name = "obj_dyn[" + std::to_string(n) + "]";
    b.block.kind = ConstraintKind::Equality;
    b.block.rows = 12;
    b.add_segment(L.obj_pose(n), 6);
    b.add_segment(L.obj_twist(n), 6);
    b.add_segment(L.obj_pose(n + 1), 6);
    b.add_segment(L.obj_twist(n + 1), 6);
    b.add_var(L.dt(n));
    for (int a = 0; a < arms; ++a) {
      b.add_var(L.f_normal(n, a));
      b.add_segment(L.f_tan(n, a), 2);
    }
    for (int a = 0; a < arms; ++a) {
      b.add_var(L.f_normal(n + 1, a));
      b.add_segment(L.f_tan(n + 1, a), 2);
    }
    const ModeTuple mode = modes[n], mode_next = modes[n + 1];
    const int n_arms = arms;
    b.block.eval = [=](const VecX& v) -> VecX {
      KnotVars k, k1;
      k.x_obj = v.segment<6>(0);
      k.xdot_obj = v.segment<6>(6);
      k1.x_obj = v.segment<6>(12);
      k1.xdot_obj = v.segment<6>(18);
      k.dt = v(24);
      k.f_normal.resize(n_arms);
      k.f_tan.resize(n_arms);
      k1.f_normal.resize(n_arms);
      k1.f_tan.resize(n_arms);
      for (int a = 0; a < n_arms; ++a) {
        k.f_normal[a] = v(25 + 3 * a);
        k.f_tan[a] = v.segment<2>(25 + 3 * a + 1);
        k1.f_normal[a] = v(25 + 3 * n_arms + 3 * a);
        k1.f_tan[a] = v.segment<2>(25 + 3 * n_arms + 3 * a + 1);
      }
      return object_dynamics_defect(k, k1, mode, mode_next, model, gravity, contacts);
    };
    nlp.blocks.push_back(std::move(b.block));
  }

  // End-effector motion defects (position rows; velocity jumps admitted at
  // dynamics transitions).
  for (int n = 0; n + 1 < n_knots; ++n) {
    const bool transition = modes[n].dyn != modes[n + 1].dyn;
    for (int a = 0; a < arms; ++a) {
      BlockBuilder b;
      b.block.name = "ee_motion[" + std::to_string(n) + "," + std::to_string(a) + "]";
      b.block.kind = ConstraintKind::Equality;
      b.block.rows = 3;
      b.add_segment(L.ee_pos(n, a), 3);
      b.add_segment(L.ee_vel(n, a), 3);
      b.add_segment(L.ee_pos(n + 1, a), 3);
      b.add_segment(L.ee_vel(n + 1, a), 3);
      b.add_var(L.dt(n));
      const bool trans = transition && cfg.allow_velocity_jump;
      b.block.eval = [trans](const VecX& v) -> VecX {
        const Vec3 x0 = v.segment<3>(0), v0 = v.segment<3>(3);
        const Vec3 x1 = v.segment<3>(6), v1 = v.segment<3>(9);
        const Real dt = v(12);
        VecX r(3);
        if (trans) {
          r = x1 - x0 - dt * v0;
        } else {
          r = x1 - x0 - 0.5 * dt * (v0 + v1);
        }
        return r;
      };
      b.block.jac_analytic = [trans](const VecX& v) -> MatX {
        const Vec3 v0 = v.segment<3>(3), v1 = v.segment<3>(9);
        const Real dt = v(12);
        MatX j = MatX::Zero(3, 13);
        j.block<3, 3>(0, 0) = -Mat3::Identity();
        j.block<3, 3>(0, 6) = Mat3::Identity();
        if (trans) {
          j.block<3, 3>(0, 3) = -dt * Mat3::Identity();
          j.col(12) = -v0;
        } else {
          j.block<3, 3>(0, 3) = -0.5 * dt * Mat3::Identity();
          j.block<3, 3>(0, 9) = -0.5 * dt * Mat3::Identity();
          j.col(12) = -0.5 * (v0 + v1);
        }
        return j;
      };
      nlp.blocks.push_back(std::move(b.block));

      if (transition && !cfg.allow_velocity_jump) {
        BlockBuilder vb;
        vb.block.name =
            "ee_vel_cont[" + std::to_string(n) + "," + std::to_string(a) + "]";
        vb.block.kind = ConstraintKind::Equality;
        vb.block.rows = 3;
        vb.add_segment(L.ee_vel(n, a), 3);
        vb.add_segment(L.ee_vel(n + 1, a), 3);
        vb.block.eval = [](const VecX& v) -> VecX {
          return v.segment<3>(3) - v.segment<3>(0);
        };
        vb.block.jac_analytic = [](const VecX&) -> MatX {
          MatX j(3, 6);
          j << -Mat3::Identity(), Mat3::Identity();
          return j;
        };
        nlp.blocks.push_back(std::move(vb.block));
      }
    }
  }

  // Contact force transmission (cd-DS) defects on contact-contact intervals.
  if (cfg.impact_aware) {
    for (int n = 0; n + 1 < n_knots; ++n) {
      if (modes[n].dyn != DynMode::Contact || modes[n + 1].dyn != DynMode::Contact) {
        continue;
      }
      const int phase = phase_of(modes[n]);
      for (int a = 0; a < arms; ++a) {
        BlockBuilder b;
        b.block.name =
            "force_dyn[" + std::to_string(n) + "," + std::to_string(a) + "]";
        b.block.kind = ConstraintKind::Equality;
        b.block.rows = 2;
        b.add_var(L.f_normal(n, a));
        b.add_var(L.f_dot(n, a));
        b.add_var(L.f_normal(n + 1, a));
        b.add_var(L.f_dot(n + 1, a));
        b.add_var(L.dt(n));
        b.add_var(L.alpha(phase, a));
        b.add_var(L.f_target(phase, a));
        b.block.eval = [](const VecX& v) -> VecX {
          const Real f0 = v(0), fd0 = v(1), f1 = v(2), fd1 = v(3);
          const Real dt = v(4), a = v(5), tgt = v(6);
          const Real g0 = -a * a * f0 - 2.0 * a * fd0 + a * a * tgt;
          const Real g1 = -a * a * f1 - 2.0 * a * fd1 + a * a * tgt;
          VecX r(2);
          r(0) = f1 - f0 - 0.5 * dt * (fd0 + fd1);
          r(1) = fd1 - fd0 - 0.5 * dt * (g0 + g1);
          return r;
        };
        b.block.jac_analytic = [](const VecX& v) -> MatX {
          const Real f0 = v(0), fd0 = v(1), f1 = v(2), fd1 = v(3);
          const Real dt = v(4), a = v(5), tgt = v(6);
          const Real g0 = -a * a * f0 - 2.0 * a * fd0 + a * a * tgt;
          const Real g1 = -a * a * f1 - 2.0 * a * fd1 + a * a * tgt;
          MatX j = MatX::Zero(2, 7);
          j(0, 0) = -1.0;
          j(0, 1) = -0.5 * dt;
          j(0, 2) = 1.0;
          j(0, 3) = -0.5 * dt;
          j(0, 4) = -0.5 * (fd0 + fd1);
          j(1, 0) = 0.5 * dt * a * a;
          j(1, 1) = -1.0 + dt * a;
          j(1, 2) = 0.5 * dt * a * a;
          j(1, 3) = 1.0 + dt * a;
          j(1, 4) = -0.5 * (g0 + g1);
          const Real dg0_da = -2.0 * a * f0 - 2.0 * fd0 + 2.0 * a * tgt;
          const Real dg1_da = -2.0 * a * f1 - 2.0 * fd1 + 2.0 * a * tgt;
          j(1, 5) = -0.5 * dt * (dg0_da + dg1_da);
          j(1, 6) = -dt * a * a;
          return j;
        };
        nlp.blocks.push_back(std::move(b.block));
      }
    }
  }

  // Planning-mode coupling / clearance.
  for (int n = 0; n < n_knots; ++n) {
    for (int a = 0; a < arms; ++a) {
      const ContactSpec contact = contacts[a];
      if (modes[n].plan == PlanMode::Coupled) {
        BlockBuilder b;
        b.block.name = "coupling[" + std::to_string(n) + "," + std::to_string(a) + "]";
        b.block.kind = ConstraintKind::Equality;
        b.block.rows = 3;
        b.add_segment(L.ee_pos(n, a), 3);
        b.add_segment(L.obj_pose(n), 6);
        b.block.eval = [contact](const VecX& v) -> VecX {
          return coupling_residual_coupled(v.segment<3>(0), v.segment<6>(3), contact);
        };
        nlp.blocks.push_back(std::move(b.block));
      } else {
        BlockBuilder b;
        b.block.name = "clearance[" + std::to_string(n) + "," + std::to_string(a) + "]";
        b.block.kind = ConstraintKind::Inequality;
        b.block.rows = 1;
        b.add_segment(L.ee_pos(n, a), 3);
        b.add_segment(L.obj_pose(n), 6);
        b.block.eval = [contact](const VecX& v) -> VecX {
          VecX r(1);
          r(0) = clearance_residual_decoupled(v.segment<3>(0), v.segment<6>(3), contact);
          return r;
        };
        nlp.blocks.push_back(std::move(b.block));
      }
    }
  }

  // Friction cones at contact knots.
  for (int n = 0; n < n_knots; ++n) {
    if (modes[n].dyn != DynMode::Contact) continue;
    for (int a = 0; a < arms; ++a) {
      BlockBuilder b;
      b.block.name = "cone[" + std::to_string(n) + "," + std::to_string(a) + "]";
      b.block.kind = ConstraintKind::Inequality;
      b.block.rows = 1;
      b.add_var(L.f_normal(n, a));
      b.add_segment(L.f_tan(n, a), 2);
      b.block.eval = [mu, eps_f](const VecX& v) -> VecX {
        VecX r(1);
        r(0) = friction_cone_smoothed(v(0), v.segment<2>(1), mu, eps_f);
        return r;
      };
      b.block.jac_analytic = [mu, eps_f](const VecX& v) -> MatX {
        MatX j(1, 3);
        const Vec2 ft = v.segment<2>(1);
        const Real root = std::sqrt(ft.squaredNorm() + eps_f * eps_f);
        j(0, 0) = -mu;
        j(0, 1) = ft(0) / root;
        j(0, 2) = ft(1) / root;
        return j;
      };
      nlp.blocks.push_back(std::move(b.block));
    }
  }

  // Workspace spheres for every knot and arm.
  const Real r_w = scenario.workspace_radius;
  for (int n = 0; n < n_knots; ++n) {
    for (int a = 0; a < arms; ++a) {
      const Vec3 center = scenario.workspace_centers[a];
      BlockBuilder b;
      b.block.name = "workspace[" + std::to_string(n) + "," + std::to_string(a) + "]";
      b.block.kind = ConstraintKind::Inequality;
      b.block.rows = 1;
      b.add_segment(L.ee_pos(n, a), 3);
      b.block.eval = [center, r_w](const VecX& v) -> VecX {
        VecX r(1);
        r(0) = ((v.segment<3>(0) - center).squaredNorm() - r_w * r_w) / (2.0 * r_w);
        return r;
      };
      b.block.jac_analytic = [center, r_w](const VecX& v) -> MatX {
        MatX j(1, 3);
        j.row(0) = ((v.segment<3>(0) - center) / r_w).transpose();
        return j;
      };
      nlp.blocks.push_back(std::move(b.block));
    }
  }

  // --- Objective -----------------------------------------------------------
  const Real wf = cfg.weight_force;
  const Real wa = cfg.weight_alpha_sq;
  const Real wv = cfg.weight_ee_vel;
  const bool aware = cfg.impact_aware;
  const VarLayout layout = L;
  const std::vector<ModeTuple> mode_seq = modes;

  nlp.objective = [layout, mode_seq, wf, wa, wv, aware](const VecX& x) -> Real {
    Real cost = 0.0;
    for (int n = 0; n < layout.knots(); ++n) {
      for (int a = 0; a < layout.arms(); ++a) {
        cost += wv * x.segment<3>(layout.ee_vel(n, a)).squaredNorm();
        if (mode_seq[n].dyn == DynMode::Contact) {
          const Real f = x(layout.f_normal(n, a));
          cost += wf * (f * f + x.segment<2>(layout.f_tan(n, a)).squaredNorm());
        }
      }
    }
    if (aware) {
      for (int phase = 0; phase < 2; ++phase) {
        for (int a = 0; a < layout.arms(); ++a) {
          const Real al = x(layout.alpha(phase, a));
          cost += wa * al * al;
        }
      }
    }
    return cost;
  };
  nlp.objective_grad = [layout, mode_seq, wf, wa, wv, aware](const VecX& x) -> VecX {
    VecX g = VecX::Zero(x.size());
    for (int n = 0; n < layout.knots(); ++n) {
      for (int a = 0; a < layout.arms(); ++a) {
        g.segment<3>(layout.ee_vel(n, a)) +=
            2.0 * wv * x.segment<3>(layout.ee_vel(n, a));
        if (mode_seq[n].dyn == DynMode::Contact) {
          g(layout.f_normal(n, a)) += 2.0 * wf * x(layout.f_normal(n, a));
          g.segment<2>(layout.f_tan(n, a)) +=
              2.0 * wf * x.segment<2>(layout.f_tan(n, a));
        }
      }
    }
    if (aware) {
      for (int phase = 0; phase < 2; ++phase) {
        for (int a = 0; a < layout.arms(); ++a) {
          g(layout.alpha(phase, a)) += 2.0 * wa * x(layout.alpha(phase, a));
        }
      }
    }
    return g;
  };
  nlp.objective_hess_diag = [layout, mode_seq, wf, wa, wv, aware](const VecX& x) -> VecX {
    VecX h = VecX::Zero(x.size());
    for (int n = 0; n < layout.knots(); ++n) {
      for (int a = 0; a < layout.arms(); ++a) {
        h.segment<3>(layout.ee_vel(n, a)).setConstant(2.0 * wv);
        if (mode_seq[n].dyn == DynMode::Contact) {
          h(layout.f_normal(n, a)) = 2.0 * wf;
          h.segment<2>(layout.f_tan(n, a)).setConstant(2.0 * wf);
        }
      }
    }
    if (aware) {
      for (int phase = 0; phase < 2; ++phase) {
        for (int a = 0; a < layout.arms(); ++a) {
          h(layout.alpha(phase, a)) = 2.0 * wa;
        }
      }
    }
    return h;
  };

  return problem;
}

// ---------------------------------------------------------------------------
// Initial guess
// ---------------------------------------------------------------------------

VecX initial_guess(const TranscribedProblem& problem) {
  const Scenario& sc = problem.scenario;
  const VarLayout& L = problem.layout;
  const MmtoConfig& cfg = problem.config;
  const int n_knots = sc.num_knots();
  const int arms = sc.num_arms();
  VecX x = VecX::Zero(L.total());

  int first_contact = n_knots;
  for (int n = 0; n < n_knots; ++n) {
    if (sc.modes[n].dyn == DynMode::Contact) {
      first_contact = n;
      break;
    }
  }

  // dT guess: midpoint of the bounds, slightly toward the lower end.
  std::vector<Real> dts(n_knots - 1);
  for (int i = 0; i + 1 < n_knots; ++i) {
    dts[i] = 0.5 * (sc.dt_lower[i] + std::min(sc.dt_upper[i], 4.0 * sc.dt_lower[i]));
    x(L.dt(i)) = dts[i];
  }

  // Object: ballistic through the free phase, blend to rest over contact.
  std::vector<Vec6> poses(n_knots), twists(n_knots);
  RigidBodyState obj = sc.object_initial;
  poses[0] << obj.position, obj.orientation_zyx;
  twists[0] << obj.lin_vel, obj.ang_vel;
  for (int n = 1; n < n_knots; ++n) {
    if (n <= first_contact) {
      obj = integrate_free_rigid_body(obj, sc.object, sc.gravity, dts[n - 1]);
      poses[n] << obj.position, obj.orientation_zyx;
      twists[n] << obj.lin_vel, obj.ang_vel;
    } else {
      const Real blend =
          1.0 - static_cast<Real>(n - first_contact) / (n_knots - 1 - first_contact);
      twists[n] = twists[first_contact] * blend;
      poses[n] = poses[n - 1];
      poses[n].segment<3>(0) +=
          0.5 * dts[n - 1] *
          (twists[n - 1].segment<3>(0) + twists[n].segment<3>(0));
      const Vec3 rates0 = angular_velocity_to_euler_rates(
          poses[n - 1].segment<3>(3), twists[n - 1].segment<3>(3));
      poses[n].segment<3>(3) += dts[n - 1] * rates0;
    }
  }
  for (int n = 0; n < n_knots; ++n) {
    x.segment<6>(L.obj_pose(n)) = poses[n];
    x.segment<6>(L.obj_twist(n)) = twists[n];
  }

  // End-effectors: straight line to the docking point, then ride the object.
  for (int a = 0; a < arms; ++a) {
    const Vec3 dock = first_contact < n_knots
                          ? sc.contacts[a].point_world(poses[first_contact])
                          : sc.ee_initial_pos[a];
    for (int n = 0; n < n_knots; ++n) {
      Vec3 pos, vel;
      if (n < first_contact) {
        const Real s = first_contact > 0 ? static_cast<Real>(n) / first_contact : 1.0;
        pos = (1.0 - s) * sc.ee_initial_pos[a] + s * dock;
        Real span = 0.0;
        for (int i = 0; i < first_contact; ++i) span += dts[i];
        vel = span > 0.0 ? Vec3((dock - sc.ee_initial_pos[a]) / span) : Vec3::Zero();
      } else {
        pos = sc.contacts[a].point_world(poses[n]);
        vel = twists[n].segment<3>(0);
      }
      x.segment<3>(L.ee_pos(n, a)) = pos;
      x.segment<3>(L.ee_vel(n, a)) = vel;
    }
    x.segment<3>(L.ee_pos(0, a)) = sc.ee_initial_pos[a];
    x.segment<3>(L.ee_vel(0, a)) = sc.ee_initial_vel[a];
  }

  // Forces: a rough hold force covering gravity plus momentum absorption.
  if (first_contact < n_knots) {
    Real contact_span = 0.0;
    for (int i = first_contact; i + 1 < n_knots; ++i) contact_span += dts[i];
    const Real speed = twists[first_contact].segment<3>(0).norm();
    const Real mu_eff = std::max(sc.friction_mu, 0.1);
    const Real hold =
        (sc.object.mass * sc.gravity.norm() / 2.0 +
         sc.object.mass * speed / std::max(contact_span, 0.05) / 2.0) /
        mu_eff * 0.9;
    const Real alpha0 = 8.0, alpha1 = 15.0;
    if (cfg.impact_aware) {
      for (int a = 0; a < arms; ++a) {
        x(L.alpha(0, a)) = alpha0;
        x(L.alpha(1, a)) = alpha1;
        x(L.f_target(0, a)) = hold;
        x(L.f_target(1, a)) = hold;
        force::ForceState fs;
        Real t_in_contact = 0.0;
        for (int n = first_contact; n < n_knots; ++n) {
          x(L.f_normal(n, a)) = fs.f;
          x(L.f_dot(n, a)) = fs.f_dot;
          x.segment<2>(L.f_tan(n, a)) =
              Vec2(0.0, std::min(sc.friction_mu * fs.f, fs.f));
          if (n + 1 < n_knots) {
            const Real al = phase_of(sc.modes[n]) == 0 ? alpha0 : alpha1;
            fs = force::cdds_step(fs, al, hold, dts[n]);
            t_in_contact += dts[n];
          }
        }
      }
    } else {
      for (int a = 0; a < arms; ++a) {
        for (int n = first_contact; n < n_knots; ++n) {
          x(L.f_normal(n, a)) = hold;
          x.segment<2>(L.f_tan(n, a)) = Vec2(0.0, sc.friction_mu * hold * 0.9);
        }
      }
    }
  }
  return x;
}

// ---------------------------------------------------------------------------
// Solve and extract
// ---------------------------------------------------------------------------

SolveResult solve(const TranscribedProblem& problem, const VecX& init) {
  return solve_augmented_lagrangian(problem.nlp, init, problem.config.solver);
}

Plan extract_plan(const TranscribedProblem& problem, const SolveResult& result) {
  const Scenario& sc = problem.scenario;
  const VarLayout& L = problem.layout;
  const int n_knots = sc.num_knots();
  const int arms = sc.num_arms();
  Plan plan;
  plan.status = result.status;
  plan.objective = result.objective;
  plan.max_violation = result.max_violation;
  plan.outer_iterations = result.outer_iterations;
  plan.inner_iterations = result.inner_iterations;

  Real t = 0.0;
  for (int n = 0; n < n_knots; ++n) {
    PlanKnot knot;
    knot.t = t;
    if (n + 1 < n_knots) t += result.x(L.dt(n));
    knot.obj_pose = result.x.segment<6>(L.obj_pose(n));
    knot.obj_twist = result.x.segment<6>(L.obj_twist(n));
    knot.in_contact = sc.modes[n].dyn == DynMode::Contact;
    for (int a = 0; a < arms; ++a) {
      knot.ee_pos.push_back(result.x.segment<3>(L.ee_pos(n, a)));
      knot.ee_vel.push_back(result.x.segment<3>(L.ee_vel(n, a)));
      knot.f_normal.push_back(result.x(L.f_normal(n, a)));
      knot.f_world.push_back(
          knot.in_contact
              ? sc.contacts[a].force_world(knot.obj_pose,
                                           result.x(L.f_normal(n, a)),
                                           result.x.segment<2>(L.f_tan(n, a)))
              : Vec3::Zero());
      if (knot.in_contact && problem.config.impact_aware) {
        const int phase = phase_of(sc.modes[n]);
        const auto p = force::alpha_to_stiffness(result.x(L.alpha(phase, a)),
                                                 problem.config.desired_mass);
        knot.stiffness.push_back(p.k_stiff);
        knot.damping.push_back(p.b_damp);
      } else {
        knot.stiffness.push_back(0.0);
        knot.damping.push_back(0.0);
      }
    }
    plan.knots.push_back(std::move(knot));
  }
  if (problem.config.impact_aware) {
    for (int a = 0; a < arms; ++a) {
      plan.alpha_soft.push_back(result.x(L.alpha(0, a)));
      plan.alpha_stiff.push_back(result.x(L.alpha(1, a)));
    }
  }
  return plan;
}

}  // namespace bicatch::mmto
