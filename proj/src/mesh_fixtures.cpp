#include "bicatch/mesh_fixtures.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

namespace bicatch::geom {

TriangleMesh make_box(const Vec3& dims) {
  const Real hx = dims.x() / 2.0, hy = dims.y() / 2.0, hz = dims.z() / 2.0;
  std::vector<Vec3> v = {
      {-hx, -hy, -hz}, {hx, -hy, -hz}, {hx, hy, -hz}, {-hx, hy, -hz},
      {-hx, -hy, hz},  {hx, -hy, hz},  {hx, hy, hz},  {-hx, hy, hz}};
  // Outward-wound, two triangles per face.
  std::vector<std::array<int, 3>> f = {
      {0, 2, 1}, {0, 3, 2},  // -z
      {4, 5, 6}, {4, 6, 7},  // +z
      {0, 1, 5}, {0, 5, 4},  // -y
      {2, 3, 7}, {2, 7, 6},  // +y
      {1, 2, 6}, {1, 6, 5},  // +x
      {3, 0, 4}, {3, 4, 7}   // -x
  };
  return finalize_mesh(std::move(v), std::move(f));
}

TriangleMesh make_cube(Real side) { return make_box(Vec3(side, side, side)); }

TriangleMesh make_icosphere(Real radius, int subdivisions) {
  const Real t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {
      {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0},
      {0, -1, t}, {0, 1, t}, {0, -1, -t}, {0, 1, -t},
      {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p = p.normalized() * radius;
  std::vector<std::array<int, 3>> f = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::make_pair(std::min(a, b), std::max(a, b));
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      v.push_back(((v[a] + v[b]) / 2.0).normalized() * radius);
      const int idx = static_cast<int>(v.size()) - 1;
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(f.size() * 4);
    for (const auto& tri : f) {
      const int ab = mid(tri[0], tri[1]);
      const int bc = mid(tri[1], tri[2]);
      const int ca = mid(tri[2], tri[0]);
      next.push_back({tri[0], ab, ca});
      next.push_back({tri[1], bc, ab});
      next.push_back({tri[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    f = std::move(next);
  }
  return finalize_mesh(std::move(v), std::move(f));
}

TriangleMesh make_dodecahedron(Real side) {
  const Real phi = (1.0 + std::sqrt(5.0)) / 2.0;
  const Real inv = 1.0 / phi;
  std::vector<Vec3> v;
  for (Real sx : {-1.0, 1.0})
    for (Real sy : {-1.0, 1.0})
      for (Real sz : {-1.0, 1.0}) v.emplace_back(sx, sy, sz);
  for (Real s1 : {-1.0, 1.0})
    for (Real s2 : {-1.0, 1.0}) {
      v.emplace_back(0.0, s1 * inv, s2 * phi);
      v.emplace_back(s1 * inv, s2 * phi, 0.0);
      v.emplace_back(s1 * phi, 0.0, s2 * inv);
    }
  // Canonical coordinates have edge length 2/phi.
  const Real scale = side / (2.0 / phi);
  for (auto& p : v) p *= scale;

  // Recover the 12 pentagons geometrically: each face plane passes through
  // exactly 5 vertices; fan-triangulate each ordered ring.
  std::vector<std::array<int, 3>> faces;
  const int n = static_cast<int>(v.size());
  std::vector<Vec3> plane_normals;
  std::vector<Real> plane_offsets;
  const Real edge = side;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      if (std::abs((v[a] - v[b]).norm() - edge) > 1e-9 * std::max<Real>(1.0, edge))
        continue;
      for (int c = 0; c < n; ++c) {
        if (c == a || c == b) continue;
        if (std::abs((v[c] - v[b]).norm() - edge) > 1e-9) continue;
        Vec3 normal = (v[b] - v[a]).cross(v[c] - v[b]);
        if (normal.norm() < 1e-12) continue;
        normal.normalize();
        Real offset = normal.dot(v[a]);
        if (offset < 0) {
          normal = -normal;
          offset = -offset;
        }
        bool known = false;
        for (size_t k = 0; k < plane_normals.size(); ++k) {
          if ((plane_normals[k] - normal).norm() < 1e-6 &&
              std::abs(plane_offsets[k] - offset) < 1e-6) {
            known = true;
            break;
          }
        }
        if (known) continue;
        // Collect the vertices on this plane.
        std::vector<int> ring;
        for (int i = 0; i < n; ++i) {
          if (std::abs(normal.dot(v[i]) - offset) < 1e-9) ring.push_back(i);
        }
        if (ring.size() != 5) continue;
        plane_normals.push_back(normal);
        plane_offsets.push_back(offset);
        // Order the ring by angle about the plane center.
        Vec3 center = Vec3::Zero();
        for (int i : ring) center += v[i];
        center /= 5.0;
        Vec3 ux, uy;
        tangent_frame(normal, ux, uy);
        std::sort(ring.begin(), ring.end(), [&](int i, int j) {
          const Vec3 pi = v[i] - center, pj = v[j] - center;
          return std::atan2(uy.dot(pi), ux.dot(pi)) <
                 std::atan2(uy.dot(pj), ux.dot(pj));
        });
        for (int i = 1; i + 1 < 5; ++i) {
          faces.push_back({ring[0], ring[i], ring[i + 1]});
        }
      }
    }
  if (faces.size() != 36) {
    throw std::logic_error("dodecahedron face extraction failed");
  }
  return finalize_mesh(std::move(v), std::move(faces));
}

TriangleMesh make_torus(Real major_radius, Real minor_radius, int ring_segments,
                        int tube_segments) {
  std::vector<Vec3> v;
  v.reserve(static_cast<size_t>(ring_segments) * tube_segments);
  for (int i = 0; i < ring_segments; ++i) {
    const Real u = 2.0 * kPi * i / ring_segments;
    for (int j = 0; j < tube_segments; ++j) {
      const Real w = 2.0 * kPi * j / tube_segments;
      const Real rad = major_radius + minor_radius * std::cos(w);
      v.emplace_back(rad * std::cos(u), rad * std::sin(u),
                     minor_radius * std::sin(w));
    }
  }
  std::vector<std::array<int, 3>> f;
  f.reserve(static_cast<size_t>(ring_segments) * tube_segments * 2);
  auto idx = [&](int i, int j) {
    return (i % ring_segments) * tube_segments + (j % tube_segments);
  };
  for (int i = 0; i < ring_segments; ++i) {
    for (int j = 0; j < tube_segments; ++j) {
      const int a = idx(i, j), b = idx(i + 1, j);
      const int c = idx(i + 1, j + 1), d = idx(i, j + 1);
      f.push_back({a, b, c});
      f.push_back({a, c, d});
    }
  }
  return finalize_mesh(std::move(v), std::move(f));
}

TriangleMesh make_fixture(const std::string& name) {
  if (name == "cube") return make_cube();
  if (name == "sphere") return make_icosphere();
  if (name == "dodecahedron") return make_dodecahedron();
  if (name == "torus") return make_torus();
  throw std::invalid_argument("unknown fixture '" + name + "'");
}

void write_obj(const TriangleMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  char buf[128];
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    out << buf;
  }
  for (const auto& f : mesh.faces) {
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }
}

}  // namespace bicatch::geom
