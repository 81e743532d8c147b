#pragma once

// Triangle meshes with smoothed (area-weighted) vertex normals, global
// closest-point projection, tangent frames and finite-difference normal
// derivatives. Meshes are immutable after construction; all queries are
// read-only and thread-safe.

#include <array>
#include <string>
#include <vector>

#include "bicatch/errors.hpp"
#include "bicatch/types.hpp"

namespace bicatch::geom {

struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  std::vector<Vec3> face_normals;    // unit, one per face
  std::vector<Vec3> vertex_normals;  // unit, area-weighted average of incident faces
  bool watertight = false;           // every edge shared by exactly two faces

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_faces() const { return static_cast<int>(faces.size()); }
};

struct SurfacePoint {
  Vec3 position = Vec3::Zero();
  int face_id = -1;
  Vec3 barycentric = Vec3::Zero();  // components >= 0, sum to 1
  Vec3 smooth_normal = Vec3::UnitZ();
};

// Derives normals and the watertight flag; validates indices.
TriangleMesh finalize_mesh(std::vector<Vec3> vertices,
                           std::vector<std::array<int, 3>> faces);

// OBJ (v/f) or OFF reader, chosen by file extension. Throws ParseError.
TriangleMesh load_mesh(const std::string& path);

// Global closest point over all faces; equidistant ties keep the lowest face id.
SurfacePoint project_to_surface(const TriangleMesh& mesh, const Vec3& point);

// Barycentric interpolation of vertex normals, renormalized.
// Throws DegenerateNormal when the interpolated vector collapses.
Vec3 smoothed_normal(const TriangleMesh& mesh, const SurfacePoint& sp);

// Right-handed orthonormal frame {t_x, t_y, normal}; deterministic.
void tangent_frame(const Vec3& normal, Vec3& t_x, Vec3& t_y);

// 3x2 central-difference derivative of the smoothed normal along the tangent
// frame, with projection back to the surface at each probe.
Eigen::Matrix<Real, 3, 2> normal_jacobian(const TriangleMesh& mesh,
                                          const SurfacePoint& sp,
                                          const Vec3& t_x, const Vec3& t_y,
                                          Real delta);

// Closest point on one triangle (used by projection and by test oracles).
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                               const Vec3& c);

// Rigid transform applied to vertices (normals recomputed).
TriangleMesh transform_mesh(const TriangleMesh& mesh, const Mat3& rotation,
                            const Vec3& translation);

}  // namespace bicatch::geom
