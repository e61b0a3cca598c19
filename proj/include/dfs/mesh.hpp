#pragma once

#include <array>
#include <string>
#include <vector>

#include "dfs/geometry.hpp"

namespace dfs::render {

struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;
    std::vector<Vec3> normals;  // per vertex, unit length
};

// Area-weighted vertex normals from face windings. Vertices not referenced by
// any face get +z.
void compute_normals(TriangleMesh& mesh);

// Wavefront OBJ subset: "v x y z" and "f ..." with i, i/t, i//n, i/t/n index
// forms, 1-based or negative (relative) indices. Polygons are fan-
// triangulated from the first vertex. Faces with zero area are dropped;
// all other directives are ignored. Parse errors carry the line number.
TriangleMesh load_obj(const std::string& text);

TriangleMesh load_obj_file(const std::string& path);

// Watertight primitives centered at the origin with characteristic size
// (cube edge, sphere/cylinder diameter and height).
TriangleMesh make_cube(double size);
TriangleMesh make_icosphere(int subdiv, double size);  // subdiv in [0,4]
TriangleMesh make_cylinder(int segments, double size);  // segments >= 3, 4*segments faces

// kind: "cube", "icosphere" (param = subdivisions) or "cylinder"
// (param = segments).
TriangleMesh make_primitive(const std::string& kind, int param, double size);

// Translates all vertices; used to compose multi-object scenes.
TriangleMesh translated(TriangleMesh mesh, const Vec3& offset);
TriangleMesh merge(const TriangleMesh& a, const TriangleMesh& b);

}  // namespace dfs::render
