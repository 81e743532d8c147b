#pragma once

// Procedural fixture meshes at the sizes used throughout the tests and the
// CLI: cube 1.0 m, sphere r 0.5 m, dodecahedron side 0.3 m, torus
// R 0.225 m / r 0.075 m. All fixtures are watertight triangle meshes.

#include <string>

#include "bicatch/mesh.hpp"

namespace bicatch::geom {

TriangleMesh make_box(const Vec3& dims);
TriangleMesh make_cube(Real side = 1.0);
TriangleMesh make_icosphere(Real radius = 0.5, int subdivisions = 3);
TriangleMesh make_dodecahedron(Real side = 0.3);
TriangleMesh make_torus(Real major_radius = 0.225, Real minor_radius = 0.075,
                        int ring_segments = 48, int tube_segments = 24);

// Fixture lookup by name: cube | sphere | dodecahedron | torus.
TriangleMesh make_fixture(const std::string& name);

void write_obj(const TriangleMesh& mesh, const std::string& path);

}  // namespace bicatch::geom
