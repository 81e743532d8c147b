#include "bicatch/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace bicatch::geom {

TriangleMesh finalize_mesh(std::vector<Vec3> vertices,
                           std::vector<std::array<int, 3>> faces) {
  TriangleMesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.faces = std::move(faces);
  const int nv = mesh.num_vertices();

  mesh.face_normals.resize(mesh.faces.size());
  std::vector<Vec3> weighted(nv, Vec3::Zero());
  std::map<std::pair<int, int>, int> edge_count;

  for (size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& tri = mesh.faces[f];
    for (int i : tri) {
      if (i < 0 || i >= nv) {
        throw ParseError("face index out of range", static_cast<int>(f));
      }
    }
    const Vec3& a = mesh.vertices[tri[0]];
    const Vec3& b = mesh.vertices[tri[1]];
    const Vec3& c = mesh.vertices[tri[2]];
    const Vec3 cross = (b - a).cross(c - a);
    const Real area2 = cross.norm();
    mesh.face_normals[f] = area2 > 0.0 ? Vec3(cross / area2) : Vec3::UnitZ();
    // Area weighting: the unnormalized cross product carries twice the area.
    for (int i : tri) weighted[i] += cross;
    for (int e = 0; e < 3; ++e) {
      int u = tri[e], v = tri[(e + 1) % 3];
      edge_count[{std::min(u, v), std::max(u, v)}]++;
    }
  }

  mesh.vertex_normals.resize(nv);
  for (int i = 0; i < nv; ++i) {
    const Real n = weighted[i].norm();
    mesh.vertex_normals[i] = n > 1e-14 ? Vec3(weighted[i] / n) : Vec3::UnitZ();
  }
  mesh.watertight =
      !edge_count.empty() &&
      std::all_of(edge_count.begin(), edge_count.end(),
                  [](const auto& kv) { return kv.second == 2; });
  return mesh;
}

namespace {

std::string lower_ext(const std::string& path) {
  const auto dot = path.find_last_of('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return ext;
}

TriangleMesh load_obj(std::istream& in) {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      Vec3 v;
      if (!(ls >> v.x() >> v.y() >> v.z())) {
        throw ParseError("malformed vertex record", line_no);
      }
      vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) {
        // Accept "i", "i/t", "i/t/n", "i//n"; only the vertex index is used.
        const auto slash = tok.find('/');
        const std::string head = slash == std::string::npos ? tok : tok.substr(0, slash);
        try {
          idx.push_back(std::stoi(head) - 1);
        } catch (const std::exception&) {
          throw ParseError("malformed face index '" + tok + "'", line_no);
        }
      }
      if (idx.size() < 3) throw ParseError("face with fewer than 3 vertices", line_no);
      for (size_t i = 2; i < idx.size(); ++i) {
        faces.push_back({idx[0], idx[i - 1], idx[i]});
      }
    }
  }
  if (vertices.empty() || faces.empty()) {
    throw ParseError("no geometry found", line_no);
  }
  return finalize_mesh(std::move(vertices), std::move(faces));
}

TriangleMesh load_off(std::istream& in) {
  std::string line;
  int line_no = 0;
  auto next_content_line = [&]() -> std::string {
    while (std::getline(in, line)) {
      ++line_no;
      const auto pos = line.find_first_not_of(" \t\r");
      if (pos == std::string::npos || line[pos] == '#') continue;
      return line;
    }
    throw ParseError("unexpected end of OFF file", line_no);
  };

  std::string header = next_content_line();
  if (header.rfind("OFF", 0) != 0) throw ParseError("missing OFF header", line_no);

  std::istringstream counts(next_content_line());
  int nv = 0, nf = 0, ne = 0;
  if (!(counts >> nv >> nf >> ne) || nv <= 0 || nf <= 0) {
    throw ParseError("malformed OFF counts", line_no);
  }
  std::vector<Vec3> vertices(nv);
  for (int i = 0; i < nv; ++i) {
    std::istringstream vs(next_content_line());
    if (!(vs >> vertices[i].x() >> vertices[i].y() >> vertices[i].z())) {
      throw ParseError("malformed OFF vertex", line_no);
    }
  }
  std::vector<std::array<int, 3>> faces;
  for (int i = 0; i < nf; ++i) {
    std::istringstream fs(next_content_line());
    int k = 0;
    if (!(fs >> k) || k < 3) throw ParseError("malformed OFF face", line_no);
    std::vector<int> idx(k);
    for (int j = 0; j < k; ++j) {
      if (!(fs >> idx[j])) throw ParseError("malformed OFF face index", line_no);
    }
    for (int j = 2; j < k; ++j) faces.push_back({idx[0], idx[j - 1], idx[j]});
  }
  return finalize_mesh(std::move(vertices), std::move(faces));
}

}  // namespace

TriangleMesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'", 0);
  const std::string ext = lower_ext(path);
  if (ext == "off") return load_off(in);
  return load_obj(in);
}

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                               const Vec3& c) {
  // Ericson, Real-Time Collision Detection, section 5.1.5.
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const Real d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return a;

  const Vec3 bp = p - b;
  const Real d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return b;

  const Real vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + ab * (d1 / (d1 - d3));

  const Vec3 cp = p - c;
  const Real d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return c;

  const Real vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + ac * (d2 / (d2 - d6));

  const Real va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
  }

  const Real denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

namespace {

Vec3 barycentric_of(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 v0 = b - a, v1 = c - a, v2 = p - a;
  const Real d00 = v0.dot(v0), d01 = v0.dot(v1), d11 = v1.dot(v1);
  const Real d20 = v2.dot(v0), d21 = v2.dot(v1);
  const Real denom = d00 * d11 - d01 * d01;
  Vec3 bary;
  if (std::abs(denom) < 1e-30) {
    bary = Vec3(1.0, 0.0, 0.0);
  } else {
    bary(1) = (d11 * d20 - d01 * d21) / denom;
    bary(2) = (d00 * d21 - d01 * d20) / denom;
    bary(0) = 1.0 - bary(1) - bary(2);
  }
  // Clamp tiny negatives from roundoff and renormalize.
  for (int i = 0; i < 3; ++i) bary(i) = std::max(bary(i), 0.0);
  const Real s = bary.sum();
  return s > 0.0 ? Vec3(bary / s) : Vec3(1.0, 0.0, 0.0);
}

}  // namespace

SurfacePoint project_to_surface(const TriangleMesh& mesh, const Vec3& point) {
  SurfacePoint best;
  Real best_d2 = std::numeric_limits<Real>::infinity();
  for (int f = 0; f < mesh.num_faces(); ++f) {
    const auto& tri = mesh.faces[f];
    const Vec3 q = closest_point_on_triangle(point, mesh.vertices[tri[0]],
                                             mesh.vertices[tri[1]],
                                             mesh.vertices[tri[2]]);
    const Real d2 = (q - point).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best.position = q;
      best.face_id = f;
    }
  }
  // On-surface queries are exact fixed points (projection idempotence).
  if (best_d2 <= 1e-24) best.position = point;
  const auto& tri = mesh.faces[best.face_id];
  best.barycentric = barycentric_of(best.position, mesh.vertices[tri[0]],
                                    mesh.vertices[tri[1]], mesh.vertices[tri[2]]);
  best.smooth_normal = smoothed_normal(mesh, best);
  return best;
}

Vec3 smoothed_normal(const TriangleMesh& mesh, const SurfacePoint& sp) {
  const auto& tri = mesh.faces[sp.face_id];
  const Vec3 n = sp.barycentric(0) * mesh.vertex_normals[tri[0]] +
                 sp.barycentric(1) * mesh.vertex_normals[tri[1]] +
                 sp.barycentric(2) * mesh.vertex_normals[tri[2]];
  const Real len = n.norm();
  if (len < 1e-8) throw DegenerateNormal("interpolated normal below floor");
  return n / len;
}

void tangent_frame(const Vec3& normal, Vec3& t_x, Vec3& t_y) {
  const Vec3 ref = std::abs(normal.x()) <= 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  t_x = (ref - ref.dot(normal) * normal).normalized();
  t_y = normal.cross(t_x);
}

Eigen::Matrix<Real, 3, 2> normal_jacobian(const TriangleMesh& mesh,
                                          const SurfacePoint& sp,
                                          const Vec3& t_x, const Vec3& t_y,
                                          Real delta) {
  Eigen::Matrix<Real, 3, 2> jac;
  const Vec3 tangents[2] = {t_x, t_y};
  for (int j = 0; j < 2; ++j) {
    const Vec3 n_plus =
        project_to_surface(mesh, sp.position + delta * tangents[j]).smooth_normal;
    const Vec3 n_minus =
        project_to_surface(mesh, sp.position - delta * tangents[j]).smooth_normal;
    jac.col(j) = (n_plus - n_minus) / (2.0 * delta);
  }
  return jac;
}

TriangleMesh transform_mesh(const TriangleMesh& mesh, const Mat3& rotation,
                            const Vec3& translation) {
  std::vector<Vec3> vertices(mesh.vertices.size());
  for (size_t i = 0; i < mesh.vertices.size(); ++i) {
    vertices[i] = rotation * mesh.vertices[i] + translation;
  }
  return finalize_mesh(std::move(vertices), mesh.faces);
}

}  // namespace bicatch::geom
