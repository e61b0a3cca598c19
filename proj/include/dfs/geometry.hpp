#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace dfs {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
Vec3 normalized(const Vec3& v);  // throws on zero vector

/// Scalar-first quaternion (w, x, y, z). Unit quaternions represent rotations;
/// q and -q are the same rotation.
struct Quat {
    double w = 1.0, x = 0.0, y = 0.0, z = 0.0;

    static Quat identity() { return {1.0, 0.0, 0.0, 0.0}; }
};

inline double norm(const Quat& q) { return std::sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z); }

Quat quat_normalize(const Quat& q);
bool quat_is_unit(const Quat& q, double tol = 1e-6);

// Hamilton product; R(a*b) = R(a) R(b).
Quat quat_mul(const Quat& a, const Quat& b);
Quat quat_conjugate(const Quat& q);

// Applies the rotation to v. Requires unit q (within tol).
Vec3 quat_rotate(const Quat& q, const Vec3& v);

// Row-major 3x3 rotation matrix of a unit quaternion.
std::array<double, 9> quat_to_matrix(const Quat& q);

// Angular distance in degrees, in [0, 180]. Sign-flip invariant.
double quat_angle(const Quat& q1, const Quat& q2);

// angle in degrees; axis need not be unit but must be nonzero.
Quat axis_angle_to_quat(const Vec3& axis, double angle_deg);

// Intrinsic XYZ factorization: R(q) = Rx(rx) * Ry(ry) * Rz(rz), angles in
// radians. At gimbal lock (|ry| = pi/2) rz is fixed to 0.
std::array<double, 3> euler_from_quat(const Quat& q);
Quat quat_from_euler(double rx, double ry, double rz);

struct Pose6DoF {
    Quat rotation;
    Vec3 translation;
};

}  // namespace dfs
