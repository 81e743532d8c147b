#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "bicatch/contact_select.hpp"
#include "bicatch/mesh_fixtures.hpp"

using namespace bicatch;
using namespace bicatch::contact;
using geom::make_fixture;

namespace {

SurfacePoint vertex_point(const TriangleMesh& mesh, int vertex) {
  // A vertex as a SurfacePoint: any incident face, corner barycentric.
  for (int f = 0; f < mesh.num_faces(); ++f) {
    for (int c = 0; c < 3; ++c) {
      if (mesh.faces[f][c] == vertex) {
        SurfacePoint sp;
        sp.position = mesh.vertices[vertex];
        sp.face_id = f;
        sp.barycentric = Vec3::Zero();
        sp.barycentric(c) = 1.0;
        sp.smooth_normal = mesh.vertex_normals[vertex];
        return sp;
      }
    }
  }
  return {};
}

// Exhaustive vertex-pair scan; the coarse global oracle for K = 2.
Real best_vertex_pair_cost(const TriangleMesh& mesh, const Vec3& obj_pos,
                           const Vec3& obj_vel, const SelectWeights& w) {
  std::vector<SurfacePoint> pts(mesh.num_vertices());
  for (int i = 0; i < mesh.num_vertices(); ++i) pts[i] = vertex_point(mesh, i);
  Real best = std::numeric_limits<Real>::infinity();
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    for (int j = i + 1; j < mesh.num_vertices(); ++j) {
      best = std::min(best, total_cost({pts[i], pts[j]}, obj_pos, obj_vel, w));
    }
  }
  return best;
}

Real best_vertex_single_cost(const TriangleMesh& mesh, const Vec3& obj_pos,
                             const Vec3& obj_vel, const SelectWeights& w) {
  Real best = std::numeric_limits<Real>::infinity();
  for (int i = 0; i < mesh.num_vertices(); ++i) {
    best = std::min(best,
                    total_cost({vertex_point(mesh, i)}, obj_pos, obj_vel, w));
  }
  return best;
}

}  // namespace

TEST_CASE("contact cost residual blocks") {
  SelectWeights w;

  SUBCASE("all three terms vanish for an ideal opposing pair") {
    SurfacePoint a, b;
    a.position = Vec3::Zero();
    a.smooth_normal = Vec3::UnitY();
    b.smooth_normal = -Vec3::UnitY();
    const Vec3 v(2.0, 0.0, 0.0);  // perpendicular to both normals
    const auto e = contact_cost(a, {b}, Vec3::Zero(), v, 2, w);
    CHECK(e.cwiseAbs().maxCoeff() <= 1e-14);
  }

  SUBCASE("head-on face is the worst impact direction") {
    SurfacePoint a;
    a.position = Vec3(0.5, 0, 0);
    a.smooth_normal = Vec3::UnitX();
    const Vec3 v(2.0, 0.0, 0.0);
    const auto e = contact_cost(a, {}, Vec3::Zero(), v, 1, w);
    CHECK(e(0) == doctest::Approx(w.w1 * v.norm()).epsilon(1e-14));
  }

  SUBCASE("duplicated-formula oracle on random sphere points") {
    const auto sphere = make_fixture("sphere");
    std::mt19937 rng(57);
    std::normal_distribution<Real> gauss(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
      Vec3 dir(gauss(rng), gauss(rng), gauss(rng));
      const auto sp = geom::project_to_surface(sphere, dir.normalized());
      Vec3 dir2(gauss(rng), gauss(rng), gauss(rng));
      const auto other = geom::project_to_surface(sphere, dir2.normalized());
      const Vec3 po(0.1, -0.05, 0.0), vo(1.0, 0.4, -0.2);
      const auto e = contact_cost(sp, {other}, po, vo, 2, w);
      // Raw formula, reassembled inline.
      Real expected = 0.0;
      expected += std::pow(w.w1 * sp.smooth_normal.dot(vo), 2);
      expected += (w.w2 * (sp.position - po)).squaredNorm();
      expected += std::pow(
          w.w3 * (sp.smooth_normal.dot(other.smooth_normal) - std::cos(kPi)), 2);
      CHECK(e.squaredNorm() == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("box QP solver") {
  SUBCASE("interior optimum") {
    const Vec2 x = solve_box_qp(Mat2::Identity(), Vec2::Zero(),
                                Vec2(-1, -1), Vec2(1, 1));
    CHECK(x.norm() == 0.0);
  }

  SUBCASE("active bound clamps") {
    const Vec2 x = solve_box_qp(Mat2::Identity(), Vec2(-10, 0),
                                Vec2(-1, -1), Vec2(1, 1));
    CHECK((x - Vec2(1, 0)).norm() <= 1e-14);
  }

  SUBCASE("random PSD instances beat a dense grid scan") {
    std::mt19937 rng(61);
    std::uniform_real_distribution<Real> u(-1.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
      Eigen::Matrix<Real, 2, 2> a;
      a << u(rng), u(rng), u(rng), u(rng);
      const Mat2 q_mat = a.transpose() * a + 1e-9 * Mat2::Identity();
      const Vec2 q_vec(u(rng), u(rng));
      const Vec2 lb(-0.05, -0.05), ub(0.05, 0.05);
      const Vec2 x = solve_box_qp(q_mat, q_vec, lb, ub);
      CHECK(x(0) >= lb(0) - 1e-15);
      CHECK(x(1) <= ub(1) + 1e-15);
      auto obj = [&](const Vec2& p) {
        return 0.5 * p.dot(q_mat * p) + q_vec.dot(p);
      };
      // 100 x 100 grid scan.
      Real grid_best = std::numeric_limits<Real>::infinity();
      for (int i = 0; i < 100; ++i) {
        for (int j = 0; j < 100; ++j) {
          const Vec2 p(lb(0) + (ub(0) - lb(0)) * i / 99.0,
                       lb(1) + (ub(1) - lb(1)) * j / 99.0);
          grid_best = std::min(grid_best, obj(p));
        }
      }
      CHECK(obj(x) <= grid_best + 1e-8);
      // KKT residual: projected gradient at the solution.
      const Vec2 g = q_mat * x + q_vec;
      const Vec2 proj = (x - g).cwiseMax(lb).cwiseMin(ub);
      CHECK((proj - x).norm() <= 1e-10);
    }
  }
}

TEST_CASE("SCS-QP step") {
  SelectWeights w;

  SUBCASE("stationary point returns a zero step") {
    // Sphere pole with velocity perpendicular to the pole normal: every cost
    // gradient block vanishes there.
    const auto sphere = make_fixture("sphere");
    const auto pole = geom::project_to_surface(sphere, Vec3(0, 0, 0.6));
    const auto step = scs_qp(sphere, pole, {}, Vec3::Zero(), Vec3(2, 0, 0), 1, w);
    CHECK(step.dp.norm() <= 1e-6);
  }

  SUBCASE("cube top-face point steps to lower the cost") {
    const auto cube = make_fixture("cube");
    const auto sp = geom::project_to_surface(cube, Vec3(0.12, 0.07, 0.55));
    const Vec3 vel(2, 0, 0);
    const auto step = scs_qp(cube, sp, {}, Vec3::Zero(), vel, 1, w);
    const auto moved = geom::project_to_surface(cube, step.candidate);
    const Real before = total_cost({sp}, Vec3::Zero(), vel, w);
    const Real after = total_cost({moved}, Vec3::Zero(), vel, w);
    CHECK(after < before);
  }

  SUBCASE("QP Jacobian agrees with finite differences of the model residual") {
    // The SCS-QP linearizes the residual in tangent-plane coordinates: the
    // position block is the step before projection, the normal blocks come
    // from the projected probes. The audit differentiates exactly that model.
    const auto sphere = make_fixture("sphere");
    std::mt19937 rng(67);
    std::normal_distribution<Real> gauss(0.0, 1.0);
    const Vec3 po(0.0, 0.0, 0.0), vo(1.4, -0.3, 0.6);
    int tested = 0;
    for (int i = 0; i < 400 && tested < 20; ++i) {
      Vec3 dir(gauss(rng), gauss(rng), gauss(rng));
      if (dir.norm() < 1e-9) continue;
      const auto sp = geom::project_to_surface(sphere, dir.normalized() * 0.5);
      if (sp.barycentric.minCoeff() < 0.25) continue;  // keep probes on-face
      ++tested;
      Vec3 tx, ty;
      geom::tangent_frame(sp.smooth_normal, tx, ty);

      const auto other = geom::project_to_surface(sphere, Vec3(-0.5, 0.02, 0.01));

      // Rebuild J the same way scs_qp does and probe it against FD.
      const auto dn = geom::normal_jacobian(sphere, sp, tx, ty, w.delta);
      Eigen::Matrix<Real, 5, 2> jac;
      jac.row(0) = w.w1 * vo.transpose() * dn;
      jac.block<3, 2>(1, 0) << w.w2 * tx, w.w2 * ty;
      jac.row(4) = w.w3 * other.smooth_normal.transpose() * dn;

      auto model_residual = [&](const Vec2& dp) {
        const Vec3 cand = sp.position + dp(0) * tx + dp(1) * ty;
        const Vec3 n = geom::project_to_surface(sphere, cand).smooth_normal;
        Eigen::Matrix<Real, 5, 1> e;
        e(0) = w.w1 * n.dot(vo);
        e.segment<3>(1) = w.w2 * (cand - po);
        e(4) = w.w3 * (n.dot(other.smooth_normal) - std::cos(kPi));
        return e;
      };

      const Real h = 1e-5;
      for (int c = 0; c < 2; ++c) {
        Vec2 dp = Vec2::Zero();
        dp(c) = h;
        const Eigen::Matrix<Real, 5, 1> fd =
            (model_residual(dp) - model_residual(-dp)) / (2.0 * h);
        CHECK((jac.col(c) - fd).norm() <= 1e-4 * std::max(1.0, fd.norm()));
      }
    }
    CHECK(tested == 20);
  }
}

TEST_CASE("CD-SQP on the cube finds a face pair perpendicular to the motion") {
  const auto cube = make_fixture("cube");
  const Vec3 vel(2, 0, 0);
  // Seeds on the +x / -x faces, slightly off-center.
  const std::vector<Vec3> seeds = {Vec3(0.62, 0.11, 0.07), Vec3(-0.62, -0.09, 0.05)};
  const auto set = cd_sqp(cube, Vec3::Zero(), vel, seeds, {});

  CHECK(set.converged);
  CHECK(set.iterations <= 50);
  for (const auto& p : set.points) {
    // Landed on a face whose geometric normal is perpendicular to v.
    const Vec3 n_face = cube.face_normals[p.face_id];
    CHECK(std::abs(n_face.dot(vel)) <= 1e-6);
    // Near the CoM plane.
    CHECK(std::abs(p.position.x()) <= 0.15);
    // Still on the mesh.
    const auto reproj = geom::project_to_surface(cube, p.position);
    CHECK((reproj.position - p.position).norm() <= 1e-9);
  }
  // Opposing pair.
  CHECK(set.points[0].smooth_normal.dot(set.points[1].smooth_normal) <= -0.9);

  // Cost history is non-increasing.
  for (size_t i = 1; i < set.cost_history.size(); ++i) {
    CHECK(set.cost_history[i] <= set.cost_history[i - 1] + 1e-9);
  }
}

TEST_CASE("CD-SQP reaches inner and outer torus contacts from different seeds") {
  const auto torus = make_fixture("torus");
  const Vec3 vel(0, 0, 1.5);  // along the torus axis
  const Real major = 0.225;

  SUBCASE("seeds near the hole converge to inner contacts") {
    const std::vector<Vec3> seeds = {Vec3(0.05, 0.02, 0.0), Vec3(-0.05, -0.02, 0.0)};
    const auto set = cd_sqp(torus, Vec3::Zero(), vel, seeds, {});
    CHECK(set.converged);
    for (const auto& p : set.points) {
      CHECK(std::hypot(p.position.x(), p.position.y()) < major);
    }
  }

  SUBCASE("seeds outside converge to outer contacts") {
    const std::vector<Vec3> seeds = {Vec3(0.4, 0.03, 0.0), Vec3(-0.4, -0.03, 0.0)};
    const auto set = cd_sqp(torus, Vec3::Zero(), vel, seeds, {});
    CHECK(set.converged);
    for (const auto& p : set.points) {
      CHECK(std::hypot(p.position.x(), p.position.y()) > major);
    }
  }
}

TEST_CASE("single-contact sphere selection matches the vertex oracle") {
  const auto sphere = make_fixture("sphere");
  const Vec3 vel(2, 0, 0);
  const SelectWeights w;
  // Seed at the pole: normal already perpendicular to v.
  const auto set = cd_sqp(sphere, Vec3::Zero(), vel, {Vec3(0, 0, 0.8)}, w);
  CHECK(set.converged);
  const auto& p = set.points[0];
  CHECK(std::abs(p.smooth_normal.dot(vel)) <= 1e-6);
  // On the great circle normal to v.
  CHECK(std::abs(p.position.x()) <= 0.02);

  const Real oracle = best_vertex_single_cost(sphere, Vec3::Zero(), vel, w);
  CHECK(set.cost_history.back() <= oracle * 1.10 + 1e-12);
}

TEST_CASE("oracle gap on all fixtures (K = 2)") {
  const SelectWeights w;
  struct Case {
    const char* fixture;
    Vec3 vel;
    std::vector<Vec3> seeds;
  };
  const std::vector<Case> cases = {
      {"cube", Vec3(2, 0, 0), {Vec3(0.62, 0.11, 0.07), Vec3(-0.62, -0.09, 0.05)}},
      {"sphere", Vec3(2, 0, 0), {Vec3(0.05, 0.6, 0.1), Vec3(-0.05, -0.6, -0.1)}},
      {"dodecahedron", Vec3(1.5, 0.3, 0),
       {Vec3(0.05, 0.3, 0.05), Vec3(-0.05, -0.3, -0.04)}},
      {"torus", Vec3(0, 0, 1.5), {Vec3(0.05, 0.02, 0.0), Vec3(-0.05, -0.02, 0.0)}},
  };
  for (const auto& c : cases) {
    INFO("fixture ", c.fixture);
    const auto mesh = make_fixture(c.fixture);
    const auto set = cd_sqp(mesh, Vec3::Zero(), c.vel, c.seeds, w);
    CHECK(set.converged);
    CHECK(set.iterations <= 50);
    const Real oracle = best_vertex_pair_cost(mesh, Vec3::Zero(), c.vel, w);
    CHECK(set.cost_history.back() <= oracle * 1.10 + 1e-12);
  }
}

TEST_CASE("descent and feasibility from random seeds (property check)") {
  const auto dodeca = make_fixture("dodecahedron");
  std::mt19937 rng(71);
  std::normal_distribution<Real> gauss(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Vec3 v(gauss(rng), gauss(rng), gauss(rng));
    if (v.norm() < 0.3) v = Vec3(1, 0, 0);
    const std::vector<Vec3> seeds = {
        Vec3(gauss(rng), gauss(rng), gauss(rng)) * 0.4,
        Vec3(gauss(rng), gauss(rng), gauss(rng)) * 0.4};
    const auto set = cd_sqp(dodeca, Vec3::Zero(), v, seeds, {});
    for (size_t i = 1; i < set.cost_history.size(); ++i) {
      CHECK(set.cost_history[i] <= set.cost_history[i - 1] + 1e-9);
    }
    for (const auto& p : set.points) {
      const auto reproj = geom::project_to_surface(dodeca, p.position);
      CHECK((reproj.position - p.position).norm() <= 1e-9);
    }
  }
}
