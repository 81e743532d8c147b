#pragma once

// Impact-aware multi-contact selection on triangle meshes: per-contact cost
// residual, tangent-plane box-QP subproblem, and the cyclic coordinate-descent
// outer loop. Selection is sequential per call; concurrent calls may share
// the (immutable) mesh.

#include <vector>

#include "bicatch/mesh.hpp"
#include "bicatch/types.hpp"

namespace bicatch::contact {

using geom::SurfacePoint;
using geom::TriangleMesh;

struct SelectWeights {
  Real w1 = 2.0;  // impact-direction weight
  Real w2 = 2.0;  // CoM-proximity weight
  Real w3 = 1.0;  // coordination weight
  Vec2 dp_min = Vec2(-0.05, -0.05);  // per-step displacement box [m]
  Vec2 dp_max = Vec2(0.05, 0.05);
  Real tau = 0.010;    // convergence threshold on per-contact displacement [m]
  int max_iter = 50;   // outer iterations
  Real delta = 1e-3;   // finite-difference step for normal derivatives [m]
};

struct ContactSet {
  std::vector<SurfacePoint> points;
  bool converged = false;
  int iterations = 0;
  std::vector<Real> cost_history;  // total cost after each outer cycle
};

struct TraceRow {
  int iter = 0;
  int contact_id = 0;
  Vec3 position = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  Real cost = 0.0;  // total cost at the time of the record
};

// Residual blocks: [w1 (n . v); w2 (p - p_o); w3 sum_adj (n . n_j - cos(2pi/K))].
// `adjacent` holds the contacts coupled to this one (all others for K <= 2,
// ring neighbours for K > 2); K is the total contact count.
Eigen::Matrix<Real, 5, 1> contact_cost(const SurfacePoint& sp,
                                       const std::vector<SurfacePoint>& adjacent,
                                       const Vec3& obj_pos, const Vec3& obj_vel,
                                       int num_contacts, const SelectWeights& w);

// Sum of squared residuals over all contacts (ring adjacency).
Real total_cost(const std::vector<SurfacePoint>& points, const Vec3& obj_pos,
                const Vec3& obj_vel, const SelectWeights& w);

// Exact minimizer of 1/2 dp'Q dp + q'dp over [lb, ub]; Q symmetric PSD
// (callers regularize). Enumerates interior, edge and corner candidates.
Vec2 solve_box_qp(const Mat2& Q, const Vec2& q, const Vec2& lb, const Vec2& ub);

struct ScsStep {
  Vec2 dp = Vec2::Zero();
  Vec3 t_x = Vec3::UnitX();
  Vec3 t_y = Vec3::UnitY();
  Vec3 candidate = Vec3::Zero();  // p + t_x dp(0) + t_y dp(1), ambient space
};

// Single-contact tangent-plane QP step built from the three Jacobian blocks.
ScsStep scs_qp(const TriangleMesh& mesh, const SurfacePoint& sp,
               const std::vector<SurfacePoint>& adjacent, const Vec3& obj_pos,
               const Vec3& obj_vel, int num_contacts, const SelectWeights& w);

// Cyclic coordinate descent over SCS-QP steps with projection after each
// step. Each accepted step is backtracked (halving dp) until the total cost
// is non-increasing, which keeps cost_history monotone. Non-convergence
// within max_iter is reported through the `converged` flag, not an error.
ContactSet cd_sqp(const TriangleMesh& mesh, const Vec3& obj_pos,
                  const Vec3& obj_vel,
                  const std::vector<Vec3>& initial_ee_positions,
                  const SelectWeights& w, std::vector<TraceRow>* trace = nullptr);

}  // namespace bicatch::contact
