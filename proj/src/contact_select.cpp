#include "bicatch/contact_select.hpp"

#include <cmath>
#include <limits>

namespace bicatch::contact {

namespace {

// Ring adjacency; for K <= 2 every other contact is adjacent.
std::vector<SurfacePoint> adjacent_of(const std::vector<SurfacePoint>& points,
                                      int k) {
  const int n = static_cast<int>(points.size());
  std::vector<SurfacePoint> adj;
  if (n <= 1) return adj;
  if (n == 2) {
    adj.push_back(points[1 - k]);
    return adj;
  }
  adj.push_back(points[(k + 1) % n]);
  adj.push_back(points[(k + n - 1) % n]);
  return adj;
}

}  // namespace

Eigen::Matrix<Real, 5, 1> contact_cost(const SurfacePoint& sp,
                                       const std::vector<SurfacePoint>& adjacent,
                                       const Vec3& obj_pos, const Vec3& obj_vel,
                                       int num_contacts, const SelectWeights& w) {
  Eigen::Matrix<Real, 5, 1> e;
  e(0) = w.w1 * sp.smooth_normal.dot(obj_vel);
  e.segment<3>(1) = w.w2 * (sp.position - obj_pos);
  Real coord = 0.0;
  const Real target = std::cos(2.0 * kPi / std::max(num_contacts, 1));
  for (const auto& other : adjacent) {
    coord += sp.smooth_normal.dot(other.smooth_normal) - target;
  }
  e(4) = w.w3 * coord;
  return e;
}

Real total_cost(const std::vector<SurfacePoint>& points, const Vec3& obj_pos,
                const Vec3& obj_vel, const SelectWeights& w) {
  Real cost = 0.0;
  const int n = static_cast<int>(points.size());
  for (int k = 0; k < n; ++k) {
    const auto e = contact_cost(points[k], adjacent_of(points, k), obj_pos,
                                obj_vel, n, w);
    cost += e.squaredNorm();
  }
  return cost;
}

Vec2 solve_box_qp(const Mat2& Q, const Vec2& q, const Vec2& lb, const Vec2& ub) {
  auto objective = [&](const Vec2& x) {
    return 0.5 * x.dot(Q * x) + q.dot(x);
  };
  auto clamp = [&](Real v, int i) { return std::min(std::max(v, lb(i)), ub(i)); };

  std::vector<Vec2> candidates;
  // Interior stationary point.
  const Real det = Q(0, 0) * Q(1, 1) - Q(0, 1) * Q(1, 0);
  if (std::abs(det) > 1e-300) {
    const Vec2 x = Q.partialPivLu().solve(-q);
    if (x(0) >= lb(0) && x(0) <= ub(0) && x(1) >= lb(1) && x(1) <= ub(1)) {
      candidates.push_back(x);
    }
  }
  // Edges: fix one coordinate at a bound, minimize the 1D restriction.
  for (int i = 0; i < 2; ++i) {
    const int j = 1 - i;
    for (Real bound : {lb(i), ub(i)}) {
      Vec2 x;
      x(i) = bound;
      x(j) = Q(j, j) > 0.0 ? clamp(-(q(j) + Q(j, i) * bound) / Q(j, j), j)
                           : lb(j);
      candidates.push_back(x);
    }
  }
  // Corners.
  for (Real a : {lb(0), ub(0)})
    for (Real b : {lb(1), ub(1)}) candidates.push_back(Vec2(a, b));

  Vec2 best = candidates.front();
  Real best_obj = objective(best);
  for (const auto& c : candidates) {
    const Real o = objective(c);
    if (o < best_obj) {
      best_obj = o;
      best = c;
    }
  }
  return best;
}

ScsStep scs_qp(const TriangleMesh& mesh, const SurfacePoint& sp,
               const std::vector<SurfacePoint>& adjacent, const Vec3& obj_pos,
               const Vec3& obj_vel, int num_contacts, const SelectWeights& w) {
  ScsStep step;
  geom::tangent_frame(sp.smooth_normal, step.t_x, step.t_y);

  const auto e = contact_cost(sp, adjacent, obj_pos, obj_vel, num_contacts, w);
  const Eigen::Matrix<Real, 3, 2> dn =
      geom::normal_jacobian(mesh, sp, step.t_x, step.t_y, w.delta);

  Eigen::Matrix<Real, 5, 2> jac;
  jac.row(0) = w.w1 * obj_vel.transpose() * dn;
  jac.block<3, 2>(1, 0) << w.w2 * step.t_x, w.w2 * step.t_y;
  Eigen::Matrix<Real, 1, 2> coord = Eigen::Matrix<Real, 1, 2>::Zero();
  for (const auto& other : adjacent) {
    coord += other.smooth_normal.transpose() * dn;
  }
  jac.row(4) = w.w3 * coord;

  const Mat2 q_mat = jac.transpose() * jac + 1e-9 * Mat2::Identity();
  const Vec2 q_vec = jac.transpose() * e;
  step.dp = solve_box_qp(q_mat, q_vec, w.dp_min, w.dp_max);
  step.candidate = sp.position + step.t_x * step.dp(0) + step.t_y * step.dp(1);
  return step;
}

ContactSet cd_sqp(const TriangleMesh& mesh, const Vec3& obj_pos,
                  const Vec3& obj_vel,
                  const std::vector<Vec3>& initial_ee_positions,
                  const SelectWeights& w, std::vector<TraceRow>* trace) {
  const int num_contacts = static_cast<int>(initial_ee_positions.size());
  ContactSet set;
  set.points.reserve(num_contacts);
  for (const auto& seed : initial_ee_positions) {
    set.points.push_back(geom::project_to_surface(mesh, seed));
  }

  auto record = [&](int iter) {
    if (!trace) return;
    const Real cost = total_cost(set.points, obj_pos, obj_vel, w);
    for (int k = 0; k < num_contacts; ++k) {
      trace->push_back({iter, k, set.points[k].position,
                        set.points[k].smooth_normal, cost});
    }
  };

  set.cost_history.push_back(total_cost(set.points, obj_pos, obj_vel, w));
  record(0);

  for (int iter = 1; iter <= w.max_iter; ++iter) {
    Real max_disp = 0.0;
    for (int k = 0; k < num_contacts; ++k) {
      const auto adj = adjacent_of(set.points, k);
      const ScsStep step =
          scs_qp(mesh, set.points[k], adj, obj_pos, obj_vel, num_contacts, w);

      const Real base_cost = total_cost(set.points, obj_pos, obj_vel, w);
      const SurfacePoint prev = set.points[k];
      Real scale = 1.0;
      bool accepted = false;
      for (int bt = 0; bt < 9 && !accepted; ++bt) {
        const Vec3 cand = prev.position + scale * (step.t_x * step.dp(0) +
                                                   step.t_y * step.dp(1));
        set.points[k] = geom::project_to_surface(mesh, cand);
        if (total_cost(set.points, obj_pos, obj_vel, w) <= base_cost + 1e-12) {
          accepted = true;
        } else {
          scale *= 0.5;
        }
      }
      if (!accepted) set.points[k] = prev;
      max_disp = std::max(max_disp, (set.points[k].position - prev.position).norm());
    }
    set.cost_history.push_back(total_cost(set.points, obj_pos, obj_vel, w));
    set.iterations = iter;
    record(iter);
    if (max_disp < w.tau) {
      set.converged = true;
      break;
    }
  }
  return set;
}

}  // namespace bicatch::contact
