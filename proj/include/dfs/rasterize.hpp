#pragma once

#include "dfs/geometry.hpp"
#include "dfs/image.hpp"
#include "dfs/mesh.hpp"

namespace dfs::render {

// Pinhole camera at the origin looking down -z, y up. A camera-space point
// (x,y,z) with z < 0 projects to u = cx + fx*x/(-z), v = cy - fy*y/(-z).
struct Camera {
    double fx, fy, cx, cy;
    int width, height;

    static Camera standard(int width, int height) {
        if (width < 8 || height < 8) throw std::invalid_argument("camera: image must be at least 8x8");
        double f = 1.2 * width;
        return {f, f, width / 2.0, height / 2.0, width, height};
    }
};

struct Light {
    enum class Kind { Directional, Point };
    Kind kind = Kind::Directional;
    Vec3 param;  // unit direction toward the light, or position in meters
    double intensity = 1.0;
};

enum class RenderMode { Silhouette, Depth, Lambertian };

// Z-buffered triangle rasterization.
//
// Fill rule (pixel centers at (px+0.5, py+0.5), image y down):
//   E(a,b,p) = (b.x-a.x)*(p.y-a.y) - (b.y-a.y)*(p.x-a.x)
//   vertices are swapped so E(v0,v1,v2) > 0; a zero projected area skips the
//   triangle; p is covered iff for each edge (v1,v2),(v2,v0),(v0,v1):
//   E > 0, or E == 0 and the edge is top (b.y==a.y && b.x>a.x) or
//   left (b.y<a.y).
//
// Triangles are skipped unless all three camera-space vertices have z < 0;
// there is no near-plane clipping. Back faces are kept. Depth writes the
// nearest hit's -z in meters (background 0). Lambertian writes
// albedo * intensity * max(0, n.l) with interpolated unit normals, where l
// points toward the light; point lights attenuate by 1/r^2. Values clamp to
// [0,1]. Output is bit-exact across runs.
Image rasterize(const TriangleMesh& mesh, const Pose6DoF& pose, const Camera& cam, RenderMode mode,
                const Light& light = {}, double albedo = 0.8);

Image rasterize_silhouette(const TriangleMesh& mesh, const Pose6DoF& pose, const Camera& cam);
Image rasterize_depth(const TriangleMesh& mesh, const Pose6DoF& pose, const Camera& cam);
Image rasterize_lambertian(const TriangleMesh& mesh, const Pose6DoF& pose, const Camera& cam, const Light& light,
                           double albedo = 0.8);

// Mean squared pixel difference of two binary silhouettes; 0 iff identical,
// 1 for complementary images.
double silhouette_energy(const Image& y_sim, const Image& y_obs);

}  // namespace dfs::render
