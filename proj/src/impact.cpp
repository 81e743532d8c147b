#include "bicatch/impact.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace bicatch::impact {

namespace {
constexpr Real kMuFloor = 1e-12;
}

bool ContactFrame::orthonormal(Real tol) const {
  return std::abs(x_hat.dot(y_hat)) <= tol && std::abs(y_hat.dot(z_hat)) <= tol &&
         std::abs(z_hat.dot(x_hat)) <= tol &&
         (z_hat.cross(x_hat) - y_hat).norm() <= tol &&
         std::abs(x_hat.norm() - 1.0) <= tol &&
         std::abs(y_hat.norm() - 1.0) <= tol &&
         std::abs(z_hat.norm() - 1.0) <= tol;
}

ContactFrame ContactFrame::from_normal(const Vec3& origin, const Vec3& normal,
                                       const Vec3& v_contact) {
  ContactFrame f;
  f.origin = origin;
  f.z_hat = normal.normalized();
  const Vec3 v_tan = v_contact - v_contact.dot(f.z_hat) * f.z_hat;
  if (v_tan.norm() > 1e-12) {
    f.x_hat = (-v_tan).normalized();
  } else {
    const Vec3 ref = std::abs(f.z_hat.x()) <= 0.9 ? Vec3::UnitX() : Vec3::UnitY();
    f.x_hat = (ref - ref.dot(f.z_hat) * f.z_hat).normalized();
  }
  f.y_hat = f.z_hat.cross(f.x_hat);
  return f;
}

std::pair<Vec3, Vec3> post_impact_velocity_from_impulse(const ObjectModel& model,
                                                        const Mat3& world_inertia,
                                                        const Vec3& r,
                                                        const Vec3& impulse) {
  Eigen::SelfAdjointEigenSolver<Mat3> eig(world_inertia);
  const Real lo = eig.eigenvalues().minCoeff();
  const Real hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > 1e12) {
    throw SingularInertia("inertia condition number above 1e12");
  }
  const Vec3 delta_v = impulse / model.mass;
  const Vec3 delta_omega = world_inertia.partialPivLu().solve(r.cross(impulse));
  return {delta_v, delta_omega};
}

ContactMode stick_slip_mode(const ImpactState& state, const ImpactParams& params,
                            Real eta) {
  const Real ex = state.energies(0), ey = state.energies(1), ez = state.energies(2);
  const Real cone = params.mu * params.mu * eta * eta * ez;
  if (ex + ey < cone) return ContactMode::Stick;
  // On or outside the cone: slipping, unless the sliding velocity has
  // already collapsed, in which case the contact re-sticks.
  if (ez > kEzFloor && params.mu > kMuFloor) {
    ImpactState probe = state;
    probe.mode = ContactMode::Slip;
    const auto [u_dot, w_dot] = tangential_rates(probe, params, eta);
    const Real slide = std::hypot(state.rel_vel(0) - u_dot, state.rel_vel(1) - w_dot);
    if (slide < kStickVelTol) return ContactMode::Stick;
  }
  return ContactMode::Slip;
}

std::pair<Real, Real> tangential_rates(const ImpactState& state,
                                       const ImpactParams& params, Real eta) {
  const Real vx = state.rel_vel(0), vy = state.rel_vel(1), vz = state.rel_vel(2);
  if (state.mode == ContactMode::Stick) return {vx, vy};

  if (params.mu <= kMuFloor) return {0.0, 0.0};  // frictionless: springs unloaded
  const Real ex = state.energies(0), ey = state.energies(1), ez = state.energies(2);
  if (ez <= kEzFloor) {
    throw DegenerateNormalEnergy("slip rates need normal strain energy above floor");
  }
  const Real mu2 = params.mu * params.mu;
  const Real ez_rate = -vz;
  const Real sx = state.sigma(0), sy = state.sigma(1);
  const Real denom = mu2 * eta * eta * ez;
  const Real sqrt_exey = std::sqrt(ex * ey);
  const Real u_dot = (sx * mu2 * eta * eta * eta * ez_rate * std::sqrt(ez * ex) +
                      vx * ey - sx * sy * vy * sqrt_exey) /
                     denom;
  const Real w_dot = (sy * mu2 * eta * eta * eta * ez_rate * std::sqrt(ez * ey) +
                      vy * ex - sx * sy * vx * sqrt_exey) /
                     denom;
  return {u_dot, w_dot};
}

ImpactResult simulate_impact(const ObjectModel& model,
                             const RigidBodyState& pre_state,
                             const ContactFrame& frame,
                             const ImpactParams& params) {
  const Vec3 r = frame.origin - pre_state.position;
  const Mat3 iw = world_inertia(model, pre_state.orientation_zyx);

  // Contact-space inverse inertia: v_cp change = K * impulse (world frame).
  const Mat3 rx = skew(r);
  const Mat3 k_cp =
      Mat3::Identity() / model.mass - rx * iw.partialPivLu().solve(rx);

  const Vec3 v_cp0 = pre_state.lin_vel + pre_state.ang_vel.cross(r);

  ImpactState s;
  s.rel_vel = frame.to_frame(v_cp0);
  if (s.rel_vel(2) >= 0.0) {
    throw NotApproaching("contact-normal relative velocity must be negative");
  }

  ImpactResult result;
  result.history.reserve(4096);
  result.terminated = ImpactTermination::MaxSteps;

  Real eta = params.eta0;
  const Real d_lz = params.d_lambda_z;

  for (long step = 0; step < params.max_steps; ++step) {
    const Real vz = s.rel_vel(2);

    if (s.stage == ImpactStage::Compression && vz >= 0.0) {
      // Peak strain: switch to restitution. The releasable normal energy is
      // e^2 of the stored energy; the stiffness ratio changes accordingly.
      s.stage = ImpactStage::Restitution;
      s.energies(2) *= params.e_rest * params.e_rest;
      if (params.e_rest <= 0.0 || s.energies(2) <= kEzFloor) {
        result.terminated = ImpactTermination::RestitutionComplete;
        break;
      }
      eta = params.eta0 / params.e_rest;
    }
    if (s.stage == ImpactStage::Restitution && s.energies(2) <= kEzFloor) {
      result.terminated = ImpactTermination::RestitutionComplete;
      break;
    }

    const Real ez = s.energies(2);
    const Real ez_rate = -vz;

    s.mode = ez <= kEzFloor ? ContactMode::Stick : stick_slip_mode(s, params, eta);
    const auto [u_dot, w_dot] =
        ez <= kEzFloor ? std::pair<Real, Real>(s.rel_vel(0), s.rel_vel(1))
                       : tangential_rates(s, params, eta);

    Real lx_rate = 0.0, ly_rate = 0.0;
    if (ez > kEzFloor) {
      if (s.energies(0) > 0.0) {
        lx_rate = -s.sigma(0) / eta * std::sqrt(s.energies(0) / ez);
      }
      if (s.energies(1) > 0.0) {
        ly_rate = -s.sigma(1) / eta * std::sqrt(s.energies(1) / ez);
      }
    }

    s.impulse += Vec3(lx_rate, ly_rate, 1.0) * d_lz;

    if (ez > kEzFloor && params.mu > kMuFloor) {
      const Real g_scale =
          (s.stage == ImpactStage::Restitution ? params.e_rest : 1.0) / std::sqrt(ez);
      s.g_track(0) += g_scale * u_dot * d_lz;
      s.g_track(1) += g_scale * w_dot * d_lz;
    }
    s.energies(0) = s.g_track(0) * s.g_track(0) / (4.0 * params.eta0 * params.eta0);
    s.energies(1) = s.g_track(1) * s.g_track(1) / (4.0 * params.eta0 * params.eta0);
    s.energies(2) = std::max(ez + ez_rate * d_lz, 0.0);

    // Coulomb saturation: the tangential springs cannot store more than the
    // cone admits; excess stretch is slip displacement. Keeping the state on
    // the cone is what makes the slip-branch fractions valid.
    if (params.mu > kMuFloor) {
      const Real tangential = s.energies(0) + s.energies(1);
      const Real cone = params.mu * params.mu * eta * eta * s.energies(2);
      if (tangential > cone && tangential > 0.0) {
        const Real scale = cone / tangential;
        s.energies(0) *= scale;
        s.energies(1) *= scale;
        const Real g_scale2 = std::sqrt(scale);
        s.g_track(0) *= g_scale2;
        s.g_track(1) *= g_scale2;
      }
    }
    s.sigma(0) = s.g_track(0) >= 0.0 ? 1.0 : -1.0;
    s.sigma(1) = s.g_track(1) >= 0.0 ? 1.0 : -1.0;

    const Vec3 impulse_world = frame.to_world(s.impulse);
    s.rel_vel = frame.to_frame(v_cp0 + k_cp * impulse_world);

    result.history.push_back(s);
  }

  result.total_impulse = frame.to_world(s.impulse);
  const auto [dv, dw] = post_impact_velocity_from_impulse(
      model, iw, r, result.total_impulse);
  result.delta_lin_vel = dv;
  result.delta_ang_vel = dw;
  return result;
}

std::vector<SweepRow> impulse_sweep(const ObjectModel& model,
                                    const ContactFrame& frame,
                                    const Vec3& com_world, Real speed,
                                    const ImpactParams& params,
                                    const std::vector<Real>& angles_deg,
                                    const Vec3& omega) {
  std::vector<SweepRow> rows;
  rows.reserve(angles_deg.size());
  for (Real angle : angles_deg) {
    const Real rad = deg2rad(angle);
    // 180 deg: velocity aligned with -z (head-on); 90 deg: tangential.
    const Vec3 v_frame(-speed * std::sin(rad), 0.0, speed * std::cos(rad));

    RigidBodyState pre;
    pre.position = com_world;
    pre.lin_vel = frame.to_world(v_frame);
    pre.ang_vel = omega;

    const ImpactResult res = simulate_impact(model, pre, frame, params);
    const Vec3 lf = frame.to_frame(res.total_impulse);
    SweepRow row;
    row.angle_deg = angle;
    row.lambda_n = std::abs(lf.z());
    row.lambda_t = std::hypot(lf.x(), lf.y());
    row.lambda_total = lf.norm();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace bicatch::impact
