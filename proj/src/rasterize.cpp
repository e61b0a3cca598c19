#include "dfs/rasterize.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dfs::render {

namespace {

struct Vert {
    double u, v, d;     // pixel coords, depth (-z)
    Vec3 pos;           // camera space
    Vec3 normal;        // camera space, unit
};

inline double edge(double ax, double ay, double bx, double by, double px, double py) {
    return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

inline bool top_left(const Vert& a, const Vert& b) {
    return (b.v == a.v && b.u > a.u) || (b.v < a.v);
}

}  // namespace

Image rasterize(const TriangleMesh& mesh, const Pose6DoF& pose, const Camera& cam, RenderMode mode,
                const Light& light, double albedo) {
    if (mesh.vertices.empty() || mesh.faces.empty()) throw std::invalid_argument("rasterize: empty mesh");
    if (mesh.normals.size() != mesh.vertices.size())
        throw std::invalid_argument("rasterize: mesh has no normals (call compute_normals)");
    if (mode == RenderMode::Lambertian && light.kind == Light::Kind::Directional &&
        std::abs(norm(light.param) - 1.0) > 1e-6)
        throw std::invalid_argument("rasterize: directional light must have unit direction");

    const int w = cam.width, h = cam.height;
    Image img(w, h, mode == RenderMode::Lambertian ? 3 : 1);
    std::vector<double> inv_depth(static_cast<std::size_t>(w) * h, 0.0);

    // transform into camera space once
    std::vector<Vert> verts(mesh.vertices.size());
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        Vec3 p = quat_rotate(pose.rotation, mesh.vertices[i]) + pose.translation;
        Vert& vt = verts[i];
        vt.pos = p;
        vt.normal = quat_rotate(pose.rotation, mesh.normals[i]);
        if (p.z < 0.0) {
            vt.d = -p.z;
            vt.u = cam.cx + cam.fx * p.x / vt.d;
            vt.v = cam.cy - cam.fy * p.y / vt.d;
        } else {
            vt.d = 0.0;  // marks "not in front"
        }
    }

    for (const auto& f : mesh.faces) {
        Vert v0 = verts[f[0]], v1 = verts[f[1]], v2 = verts[f[2]];
        if (v0.d <= 0.0 || v1.d <= 0.0 || v2.d <= 0.0) continue;

        double area2 = edge(v0.u, v0.v, v1.u, v1.v, v2.u, v2.v);
        if (area2 < 0.0) {
            std::swap(v1, v2);
            area2 = -area2;
        }
        if (area2 == 0.0) continue;

        int x0 = std::max(0, static_cast<int>(std::ceil(std::min({v0.u, v1.u, v2.u}) - 0.5)));
        int x1 = std::min(w - 1, static_cast<int>(std::floor(std::max({v0.u, v1.u, v2.u}) - 0.5)));
        int y0 = std::max(0, static_cast<int>(std::ceil(std::min({v0.v, v1.v, v2.v}) - 0.5)));
        int y1 = std::min(h - 1, static_cast<int>(std::floor(std::max({v0.v, v1.v, v2.v}) - 0.5)));

        bool tl0 = top_left(v1, v2), tl1 = top_left(v2, v0), tl2 = top_left(v0, v1);
        double id0 = 1.0 / v0.d, id1 = 1.0 / v1.d, id2 = 1.0 / v2.d;

        for (int py = y0; py <= y1; ++py) {
            double cy = py + 0.5;
            for (int px = x0; px <= x1; ++px) {
                double cx = px + 0.5;
                double w0 = edge(v1.u, v1.v, v2.u, v2.v, cx, cy);
                double w1 = edge(v2.u, v2.v, v0.u, v0.v, cx, cy);
                double w2 = edge(v0.u, v0.v, v1.u, v1.v, cx, cy);
                bool in = (w0 > 0.0 || (w0 == 0.0 && tl0)) && (w1 > 0.0 || (w1 == 0.0 && tl1)) &&
                          (w2 > 0.0 || (w2 == 0.0 && tl2));
                if (!in) continue;

                double b0 = w0 / area2, b1 = w1 / area2, b2 = w2 / area2;
                double inv_d = b0 * id0 + b1 * id1 + b2 * id2;
                std::size_t pi = static_cast<std::size_t>(py) * w + px;
                if (inv_d <= inv_depth[pi]) continue;
                inv_depth[pi] = inv_d;

                switch (mode) {
                    case RenderMode::Silhouette:
                        img.data[pi] = 1.0f;
                        break;
                    case RenderMode::Depth:
                        img.data[pi] = static_cast<float>(1.0 / inv_d);
                        break;
                    case RenderMode::Lambertian: {
                        double d = 1.0 / inv_d;
                        // perspective-correct attribute interpolation
                        Vec3 pos = (v0.pos * (b0 * id0) + v1.pos * (b1 * id1) + v2.pos * (b2 * id2)) * d;
                        Vec3 n = (v0.normal * (b0 * id0) + v1.normal * (b1 * id1) + v2.normal * (b2 * id2)) * d;
                        double nl = norm(n);
                        if (nl > 0.0) n = n * (1.0 / nl);
                        double value;
                        if (light.kind == Light::Kind::Directional) {
                            value = albedo * light.intensity * std::max(0.0, dot(n, light.param));
                        } else {
                            Vec3 to_light = light.param - pos;
                            double r2 = dot(to_light, to_light);
                            double r = std::sqrt(r2);
                            value = r > 0.0
                                        ? albedo * light.intensity * std::max(0.0, dot(n, to_light * (1.0 / r))) / r2
                                        : 0.0;
                        }
                        float px_val = static_cast<float>(std::clamp(value, 0.0, 1.0));
                        for (int c = 0; c < 3; ++c) img.data[pi * 3 + c] = px_val;
                        break;
                    }
                }
            }
        }
    }
    return img;
}

Image rasterize_silhouette(const TriangleMesh& mesh, const Pose6DoF& pose, const Camera& cam) {
    return rasterize(mesh, pose, cam, RenderMode::Silhouette);
}
Image rasterize_depth(const TriangleMesh& mesh, const Pose6DoF& pose, const Camera& cam) {
    return rasterize(mesh, pose, cam, RenderMode::Depth);
}
Image rasterize_lambertian(const TriangleMesh& mesh, const Pose6DoF& pose, const Camera& cam, const Light& light,
                           double albedo) {
    return rasterize(mesh, pose, cam, RenderMode::Lambertian, light, albedo);
}

double silhouette_energy(const Image& y_sim, const Image& y_obs) {
    if (y_sim.width != y_obs.width || y_sim.height != y_obs.height || y_sim.channels != 1 || y_obs.channels != 1)
        throw std::invalid_argument("silhouette_energy: dimension mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < y_sim.data.size(); ++i) {
        float a = y_sim.data[i], b = y_obs.data[i];
        if ((a != 0.0f && a != 1.0f) || (b != 0.0f && b != 1.0f))
            throw std::invalid_argument("silhouette_energy: images must be binary");
        double d = static_cast<double>(a) - static_cast<double>(b);
        sum += d * d;
    }
    return sum / static_cast<double>(y_sim.data.size());
}

}  // namespace dfs::render
