#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "bicatch/mesh.hpp"
#include "bicatch/mesh_fixtures.hpp"

using namespace bicatch;
using namespace bicatch::geom;

namespace {

// Brute-force closest point: scan every triangle directly.
Real brute_force_distance(const TriangleMesh& mesh, const Vec3& p) {
  Real best = std::numeric_limits<Real>::infinity();
  for (const auto& tri : mesh.faces) {
    const Vec3 q = closest_point_on_triangle(p, mesh.vertices[tri[0]],
                                             mesh.vertices[tri[1]],
                                             mesh.vertices[tri[2]]);
    best = std::min(best, (q - p).norm());
  }
  return best;
}

std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = std::string("/tmp/") + name;
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("fixture meshes are watertight with unit normals") {
  for (const char* name : {"cube", "sphere", "dodecahedron", "torus"}) {
    const auto mesh = make_fixture(name);
    INFO("fixture ", name);
    CHECK(mesh.watertight);
    for (const auto& n : mesh.face_normals) {
      CHECK(std::abs(n.norm() - 1.0) <= 1e-10);
    }
    for (const auto& n : mesh.vertex_normals) {
      CHECK(std::abs(n.norm() - 1.0) <= 1e-10);
    }
  }
}

TEST_CASE("cube OBJ loads with axis-aligned face normals") {
  const auto cube = make_cube(1.0);
  const std::string path = "/tmp/bicatch_cube.obj";
  write_obj(cube, path);
  const auto loaded = load_mesh(path);
  CHECK(loaded.num_vertices() == 8);
  CHECK(loaded.num_faces() == 12);
  for (const auto& n : loaded.face_normals) {
    // Exactly one unit component.
    CHECK(n.cwiseAbs().maxCoeff() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(n.cwiseAbs().sum() - 1.0) <= 1e-10);
  }
  std::remove(path.c_str());
}

TEST_CASE("icosphere OFF round-trip keeps radial vertex normals") {
  const auto sphere = make_icosphere(0.5, 2);
  std::string off = "OFF\n";
  off += std::to_string(sphere.num_vertices()) + " " +
         std::to_string(sphere.num_faces()) + " 0\n";
  char buf[128];
  for (const auto& v : sphere.vertices) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    off += buf;
  }
  for (const auto& f : sphere.faces) {
    off += "3 " + std::to_string(f[0]) + " " + std::to_string(f[1]) + " " +
           std::to_string(f[2]) + "\n";
  }
  const auto path = write_temp("bicatch_sphere.off", off);
  const auto loaded = load_mesh(path);
  const Real max_angle_deg = 2.0;
  for (int i = 0; i < loaded.num_vertices(); ++i) {
    const Vec3 radial = loaded.vertices[i].normalized();
    const Real cosang = radial.dot(loaded.vertex_normals[i]);
    CHECK(std::acos(std::min(cosang, 1.0)) <= deg2rad(max_angle_deg));
  }
  std::remove(path.c_str());
}

TEST_CASE("truncated OBJ raises ParseError") {
  const auto path = write_temp("bicatch_trunc.obj", "v 0 0\n");
  CHECK_THROWS_AS(load_mesh(path), ParseError);
  std::remove(path.c_str());

  const auto path2 = write_temp("bicatch_trunc.off", "OFF\n8 12 0\n0 0 0\n");
  CHECK_THROWS_AS(load_mesh(path2), ParseError);
  std::remove(path2.c_str());
}

TEST_CASE("projection: idempotence, ties and brute-force equivalence") {
  const auto cube = make_cube(1.0);

  SUBCASE("point on a face projects to itself") {
    const Vec3 p(0.5, 0.1, -0.2);
    const auto sp = project_to_surface(cube, p);
    CHECK((sp.position - p).norm() <= 1e-12);
  }

  SUBCASE("cube center ties break to the lowest face id") {
    const auto sp = project_to_surface(cube, Vec3::Zero());
    CHECK((sp.position - Vec3::Zero()).norm() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(sp.face_id == 0);
  }

  SUBCASE("projection idempotence") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<Real> u(-1.5, 1.5);
    for (int i = 0; i < 100; ++i) {
      const Vec3 p(u(rng), u(rng), u(rng));
      const auto sp = project_to_surface(cube, p);
      const auto sp2 = project_to_surface(cube, sp.position);
      CHECK((sp2.position - sp.position).norm() == 0.0);
      CHECK(sp2.face_id == sp.face_id);
    }
  }

  SUBCASE("brute force equivalence on all fixtures") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<Real> u(-1.2, 1.2);
    for (const char* name : {"cube", "sphere", "dodecahedron", "torus"}) {
      const auto mesh = make_fixture(name);
      for (int i = 0; i < 1000; ++i) {
        const Vec3 p(u(rng), u(rng), u(rng));
        const auto sp = project_to_surface(mesh, p);
        const Real got = (sp.position - p).norm();
        CHECK(std::abs(got - brute_force_distance(mesh, p)) <= 1e-9);
      }
    }
  }

  SUBCASE("barycentric consistency") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<Real> u(-1.5, 1.5);
    const auto torus = make_fixture("torus");
    for (int i = 0; i < 200; ++i) {
      const Vec3 p(u(rng), u(rng), u(rng));
      const auto sp = project_to_surface(torus, p);
      CHECK(std::abs(sp.barycentric.sum() - 1.0) <= 1e-10);
      CHECK(sp.barycentric.minCoeff() >= 0.0);
      const auto& tri = torus.faces[sp.face_id];
      const Vec3 recon = sp.barycentric(0) * torus.vertices[tri[0]] +
                         sp.barycentric(1) * torus.vertices[tri[1]] +
                         sp.barycentric(2) * torus.vertices[tri[2]];
      CHECK((recon - sp.position).norm() <= 1e-9);
    }
  }
}

TEST_CASE("smoothed normals") {
  SUBCASE("sphere: within 2 degrees of radial everywhere") {
    const auto sphere = make_icosphere(0.5, 3);
    std::mt19937 rng(29);
    std::normal_distribution<Real> gauss(0.0, 1.0);
    for (int i = 0; i < 300; ++i) {
      Vec3 dir(gauss(rng), gauss(rng), gauss(rng));
      dir.normalize();
      const auto sp = project_to_surface(sphere, 0.5 * dir);
      const Real cosang = sp.smooth_normal.dot(dir);
      CHECK(std::acos(std::min(cosang, 1.0)) <= deg2rad(2.0));
    }
  }

  SUBCASE("cube edge midpoint blends the two face normals at 45 degrees") {
    const auto cube = make_cube(1.0);
    // Midpoint of the edge between the +x and +y faces.
    const auto sp = project_to_surface(cube, Vec3(0.6, 0.6, 0.0));
    const Vec3 expected = Vec3(1, 1, 0).normalized();
    CHECK(std::abs(sp.smooth_normal.dot(expected) - 1.0) <= 2e-2);
  }

  SUBCASE("continuity across edges") {
    // Walk across a cube edge; adjacent samples at 1e-4 m spacing must not
    // jump by more than 1 degree.
    const auto cube = make_cube(1.0);
    Vec3 prev_normal = Vec3::Zero();
    bool first = true;
    for (Real s = -0.05; s <= 0.05; s += 1e-4) {
      // Path over the edge x=0.5, y=0.5 at height z=0.1.
      const Vec3 p =
          s < 0 ? Vec3(0.5, 0.5 + s, 0.1) : Vec3(0.5 - s, 0.5, 0.1);
      const auto sp = project_to_surface(cube, p);
      if (!first) {
        const Real cosang =
            std::min(1.0, std::max(-1.0, sp.smooth_normal.dot(prev_normal)));
        CHECK(std::acos(cosang) <= deg2rad(1.0));
      }
      prev_normal = sp.smooth_normal;
      first = false;
    }
  }
}

TEST_CASE("tangent frames") {
  Vec3 tx, ty;
  tangent_frame(Vec3::UnitZ(), tx, ty);
  CHECK((tx - Vec3::UnitX()).norm() <= 1e-15);
  CHECK((ty - Vec3::UnitY()).norm() <= 1e-15);

  tangent_frame(-Vec3::UnitZ(), tx, ty);
  CHECK((tx.cross(ty) + Vec3::UnitZ()).norm() <= 1e-15);

  std::mt19937 rng(31);
  std::normal_distribution<Real> gauss(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    Vec3 n(gauss(rng), gauss(rng), gauss(rng));
    if (n.norm() < 1e-6) continue;
    n.normalize();
    tangent_frame(n, tx, ty);
    Mat3 basis;
    basis << tx, ty, n;
    CHECK((basis.transpose() * basis - Mat3::Identity()).cwiseAbs().maxCoeff() <=
          1e-12);
    CHECK((tx.cross(ty) - n).norm() <= 1e-12);
  }
}

TEST_CASE("normal jacobian") {
  SUBCASE("flat cube face: zero matrix") {
    const auto cube = make_cube(1.0);
    const auto sp = project_to_surface(cube, Vec3(0.5, 0.05, 0.08));
    Vec3 tx, ty;
    tangent_frame(sp.smooth_normal, tx, ty);
    // A cube face is flat but its interpolated normal still varies; the
    // spec's zero case is the *face* normal field, checked via a large flat
    // plane instead.
    std::vector<Vec3> verts = {{-1, -1, 0}, {1, -1, 0}, {1, 1, 0}, {-1, 1, 0}};
    std::vector<std::array<int, 3>> faces = {{0, 1, 2}, {0, 2, 3}};
    const auto plane = finalize_mesh(verts, faces);
    const auto psp = project_to_surface(plane, Vec3(0.1, -0.2, 0.0));
    tangent_frame(psp.smooth_normal, tx, ty);
    const auto jac = normal_jacobian(plane, psp, tx, ty, 1e-3);
    CHECK(jac.cwiseAbs().maxCoeff() <= 1e-12);
  }

  SUBCASE("sphere: column magnitude approximates 1/R") {
    const auto sphere = make_icosphere(0.5, 3);
    const auto sp = project_to_surface(sphere, Vec3(0.1, 0.2, 0.6));
    Vec3 tx, ty;
    tangent_frame(sp.smooth_normal, tx, ty);
    const auto jac = normal_jacobian(sphere, sp, tx, ty, 1e-3);
    CHECK(jac.col(0).norm() == doctest::Approx(2.0).epsilon(0.05));
    CHECK(jac.col(1).norm() == doctest::Approx(2.0).epsilon(0.05));
  }
}
