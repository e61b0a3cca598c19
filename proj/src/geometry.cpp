#include "dfs/geometry.hpp"

#include <algorithm>

namespace dfs {

Vec3 normalized(const Vec3& v) {
    double n = norm(v);
    if (n <= 0.0) throw std::invalid_argument("normalized: zero-length vector");
    return v * (1.0 / n);
}

Quat quat_normalize(const Quat& q) {
    double n = norm(q);
    if (n <= 0.0) throw std::invalid_argument("quat_normalize: zero-norm quaternion (degenerate rotation)");
    double inv = 1.0 / n;
    return {q.w * inv, q.x * inv, q.y * inv, q.z * inv};
}

bool quat_is_unit(const Quat& q, double tol) {
    return std::abs(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z - 1.0) < tol;
}

Quat quat_mul(const Quat& a, const Quat& b) {
    return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

Quat quat_conjugate(const Quat& q) { return {q.w, -q.x, -q.y, -q.z}; }

Vec3 quat_rotate(const Quat& q, const Vec3& v) {
    if (!quat_is_unit(q)) throw std::invalid_argument("quat_rotate: quaternion is not unit");
    // v + 2w (u x v) + 2 u x (u x v), u = (x,y,z)
    Vec3 u{q.x, q.y, q.z};
    Vec3 uv = cross(u, v);
    Vec3 uuv = cross(u, uv);
    return v + uv * (2.0 * q.w) + uuv * 2.0;
}

std::array<double, 9> quat_to_matrix(const Quat& q) {
    double w = q.w, x = q.x, y = q.y, z = q.z;
    return {1 - 2 * (y * y + z * z), 2 * (x * y - w * z),     2 * (x * z + w * y),
            2 * (x * y + w * z),     1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
            2 * (x * z - w * y),     2 * (y * z + w * x),     1 - 2 * (x * x + y * y)};
}

double quat_angle(const Quat& q1, const Quat& q2) {
    if (!quat_is_unit(q1) || !quat_is_unit(q2))
        throw std::invalid_argument("quat_angle: inputs must be unit quaternions");
    double d = std::abs(q1.w * q2.w + q1.x * q2.x + q1.y * q2.y + q1.z * q2.z);
    d = std::min(d, 1.0);
    return 2.0 * std::acos(d) * 180.0 / M_PI;
}

Quat axis_angle_to_quat(const Vec3& axis, double angle_deg) {
    Vec3 a = normalized(axis);  // throws on zero axis
    double half = angle_deg * M_PI / 180.0 / 2.0;
    double s = std::sin(half);
    return {std::cos(half), a.x * s, a.y * s, a.z * s};
}

std::array<double, 3> euler_from_quat(const Quat& q) {
    if (!quat_is_unit(q)) throw std::invalid_argument("euler_from_quat: quaternion is not unit");
    auto m = quat_to_matrix(q);
    // R = Rx(rx) Ry(ry) Rz(rz):
    //   m[2] = sin(ry), m[5] = -sin(rx)cos(ry), m[8] = cos(rx)cos(ry)
    //   m[1] = -cos(ry)sin(rz), m[0] = cos(ry)cos(rz)
    double s = std::clamp(m[2], -1.0, 1.0);
    double ry = std::asin(s);
    if (std::abs(s) > 1.0 - 1e-12) {
        // gimbal lock: rx and rz are coupled; fix rz = 0.
        // Locked matrix has m[3] = sin(rx +- rz), m[4] = cos(rx +- rz).
        return {std::atan2(s * m[3], m[4]), ry, 0.0};
    }
    double rx = std::atan2(-m[5], m[8]);
    double rz = std::atan2(-m[1], m[0]);
    return {rx, ry, rz};
}

Quat quat_from_euler(double rx, double ry, double rz) {
    auto axis = [](double ang, int i) {
        double h = ang / 2.0;
        Quat q{std::cos(h), 0, 0, 0};
        (&q.x)[i] = std::sin(h);
        return q;
    };
    return quat_mul(axis(rx, 0), quat_mul(axis(ry, 1), axis(rz, 2)));
}

}  // namespace dfs
