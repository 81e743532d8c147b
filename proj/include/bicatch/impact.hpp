#pragma once

// Energy-based 3D compliance impact model: impulse-domain forward integration
// with stick/slip transitions and compression/restitution staging, plus the
// aggregate impulse / velocity-jump relations. The robot side is treated as
// fixed during the event; the object state is frozen at the pre-impact
// configuration (impulsive assumption).

#include <utility>
#include <vector>

#include "bicatch/errors.hpp"
#include "bicatch/rigid_body.hpp"
#include "bicatch/types.hpp"

namespace bicatch::impact {

struct ImpactParams {
  Real mu = 0.5;             // friction coefficient
  Real eta0 = 1.0;           // sqrt(K_n / K_t) stiffness ratio
  Real e_rest = 0.4;         // energetic coefficient of restitution, in [0, 1]
  Real k_n = 1e5;            // normal spring stiffness [N/m]
  Real d_lambda_z = 1e-4;    // normal impulse step [N s]
  long max_steps = 2000000;

  bool valid() const {
    return mu >= 0.0 && eta0 > 0.0 && e_rest >= 0.0 && e_rest <= 1.0 &&
           k_n > 0.0 && d_lambda_z > 0.0 && max_steps > 0;
  }
};

// Floor below which normal strain energy counts as released.
inline constexpr Real kEzFloor = 1e-12;
// Sliding-speed threshold for the slip -> stick capture.
inline constexpr Real kStickVelTol = 1e-6;

struct ContactFrame {
  Vec3 origin = Vec3::Zero();  // contact point, world [m]
  Vec3 x_hat = Vec3::UnitX();  // opposes the initial tangential velocity
  Vec3 y_hat = Vec3::UnitY();
  Vec3 z_hat = Vec3::UnitZ();  // surface normal

  bool orthonormal(Real tol = 1e-10) const;

  // Frame with z = normal and x opposing the tangential part of v_contact.
  static ContactFrame from_normal(const Vec3& origin, const Vec3& normal,
                                  const Vec3& v_contact);

  Vec3 to_world(const Vec3& frame_vec) const {
    return frame_vec.x() * x_hat + frame_vec.y() * y_hat + frame_vec.z() * z_hat;
  }
  Vec3 to_frame(const Vec3& world_vec) const {
    return Vec3(x_hat.dot(world_vec), y_hat.dot(world_vec), z_hat.dot(world_vec));
  }
};

enum class ContactMode { Stick, Slip };
enum class ImpactStage { Compression, Restitution };
enum class ImpactTermination { RestitutionComplete, MaxSteps };

struct ImpactState {
  Vec3 impulse = Vec3::Zero();   // frame components (Lx, Ly, Lz) [N s]
  Vec3 energies = Vec3::Zero();  // (Ex, Ey, Ez) [J]
  Vec2 g_track = Vec2::Zero();   // (Gx, Gy) tangential length trackers
  ContactMode mode = ContactMode::Stick;
  ImpactStage stage = ImpactStage::Compression;
  Vec3 rel_vel = Vec3::Zero();   // contact-point relative velocity, frame comps
  Vec2 sigma = Vec2::Ones();     // spring extension signs
};

struct ImpactResult {
  Vec3 total_impulse = Vec3::Zero();   // world frame [N s]
  Vec3 delta_lin_vel = Vec3::Zero();   // [m/s]
  Vec3 delta_ang_vel = Vec3::Zero();   // [rad/s]
  std::vector<ImpactState> history;
  ImpactTermination terminated = ImpactTermination::RestitutionComplete;
};

// delta_v = impulse / mass, delta_omega = I_w^{-1} (r x impulse).
// r is the contact point relative to the CoM, world frame; inertia is the
// world-frame inertia at the impact configuration.
std::pair<Vec3, Vec3> post_impact_velocity_from_impulse(const ObjectModel& model,
                                                        const Mat3& world_inertia,
                                                        const Vec3& r,
                                                        const Vec3& impulse);

// Energy form of the Coulomb condition, with slip -> stick capture when the
// sliding velocity has dropped below kStickVelTol.
ContactMode stick_slip_mode(const ImpactState& state, const ImpactParams& params,
                            Real eta);

// Tangential spring rates (u_dot, w_dot). Throws DegenerateNormalEnergy when
// the slip branch is requested with Ez at or below the floor.
std::pair<Real, Real> tangential_rates(const ImpactState& state,
                                       const ImpactParams& params, Real eta);

// Forward impulse-domain integration. `r` is the contact point relative to
// the object's CoM in world coordinates; pre-impact twist comes from
// pre_state. Throws NotApproaching when the normal relative velocity at the
// contact point is >= 0.
ImpactResult simulate_impact(const ObjectModel& model,
                             const RigidBodyState& pre_state,
                             const ContactFrame& frame, const ImpactParams& params);

struct SweepRow {
  Real angle_deg = 0.0;
  Real lambda_n = 0.0;      // |normal impulse|
  Real lambda_t = 0.0;      // |tangential impulse|
  Real lambda_total = 0.0;  // |impulse|
};

// Inclination sweep: the object moves at `speed` with incidence angle theta
// against a fixed plane with normal `frame.z_hat` (180 deg = head-on,
// 90 deg = grazing). Contact at frame.origin; object CoM at com_world.
std::vector<SweepRow> impulse_sweep(const ObjectModel& model,
                                    const ContactFrame& frame,
                                    const Vec3& com_world, Real speed,
                                    const ImpactParams& params,
                                    const std::vector<Real>& angles_deg,
                                    const Vec3& omega = Vec3::Zero());

}  // namespace bicatch::impact
