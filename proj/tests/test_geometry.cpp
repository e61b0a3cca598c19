#include "dfs/geometry.hpp"

#include <cmath>

#include "dfs/rng.hpp"
#include "doctest.h"

using namespace dfs;

namespace {

Quat random_unit_quat(Rng& rng) {
    Quat q{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    return quat_normalize(q);
}

// Oracle: rotation matrix columns via p' = q p q*, with a test-local Hamilton
// product so this stays independent of the library path it checks.
std::array<double, 9> matrix_via_sandwich(const Quat& q) {
    auto mul = [](const std::array<double, 4>& a, const std::array<double, 4>& b) {
        return std::array<double, 4>{a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
                                     a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
                                     a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
                                     a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]};
    };
    std::array<double, 4> qv{q.w, q.x, q.y, q.z};
    std::array<double, 4> qc{q.w, -q.x, -q.y, -q.z};
    std::array<double, 9> m{};
    for (int col = 0; col < 3; ++col) {
        std::array<double, 4> e{0, 0, 0, 0};
        e[col + 1] = 1.0;
        auto r = mul(mul(qv, e), qc);
        m[col] = r[1];
        m[3 + col] = r[2];
        m[6 + col] = r[3];
    }
    return m;
}

}  // namespace

TEST_CASE("quat_normalize") {
    Quat a = quat_normalize({2, 0, 0, 0});
    CHECK(a.w == doctest::Approx(1.0));
    CHECK(a.x == 0.0);

    Quat b = quat_normalize({0, 0, 0, 3});
    CHECK(b.z == doctest::Approx(1.0));
    CHECK(b.w == 0.0);

    CHECK_THROWS(quat_normalize({0, 0, 0, 0}));

    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        Quat q{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        if (norm(q) == 0.0) continue;
        CHECK(std::abs(norm(quat_normalize(q)) - 1.0) < 1e-9);
    }
}

TEST_CASE("quat_rotate basics") {
    Quat rz90 = axis_angle_to_quat({0, 0, 1}, 90.0);
    Vec3 r = quat_rotate(rz90, {1, 0, 0});
    CHECK(r.x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.y == doctest::Approx(1.0));
    CHECK(r.z == doctest::Approx(0.0));

    Vec3 v{0.3, -0.7, 1.1};
    Vec3 same = quat_rotate(Quat::identity(), v);
    CHECK(same.x == v.x);
    CHECK(same.y == v.y);
    CHECK(same.z == v.z);

    CHECK_THROWS(quat_rotate({1.0, 0.5, 0, 0}, v));
}

TEST_CASE("quat_rotate matches matrix oracle and preserves norm") {
    Rng rng(42);
    for (int i = 0; i < 500; ++i) {
        Quat q = random_unit_quat(rng);
        Vec3 v{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
        Vec3 r = quat_rotate(q, v);
        auto m = matrix_via_sandwich(q);
        CHECK(std::abs(r.x - (m[0] * v.x + m[1] * v.y + m[2] * v.z)) < 1e-9);
        CHECK(std::abs(r.y - (m[3] * v.x + m[4] * v.y + m[5] * v.z)) < 1e-9);
        CHECK(std::abs(r.z - (m[6] * v.x + m[7] * v.y + m[8] * v.z)) < 1e-9);
        CHECK(std::abs(norm(r) - norm(v)) < 1e-9);
    }
}

TEST_CASE("quat_to_matrix agrees with sandwich oracle") {
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        Quat q = random_unit_quat(rng);
        auto a = quat_to_matrix(q);
        auto b = matrix_via_sandwich(q);
        for (int j = 0; j < 9; ++j) CHECK(std::abs(a[j] - b[j]) < 1e-12);
    }
}

TEST_CASE("quat_angle") {
    Rng rng(11);
    Quat q = random_unit_quat(rng);
    CHECK(quat_angle(q, q) == doctest::Approx(0.0));
    Quat nq{-q.w, -q.x, -q.y, -q.z};
    CHECK(quat_angle(q, nq) == doctest::Approx(0.0));

    Quat rz90 = axis_angle_to_quat({0, 0, 1}, 90.0);
    CHECK(quat_angle(Quat::identity(), rz90) == doctest::Approx(90.0));

    CHECK_THROWS(quat_angle({2, 0, 0, 0}, q));

    // pseudometric: non-negative, symmetric, in range
    for (int i = 0; i < 200; ++i) {
        Quat a = random_unit_quat(rng);
        Quat b = random_unit_quat(rng);
        double d1 = quat_angle(a, b), d2 = quat_angle(b, a);
        CHECK(d1 >= 0.0);
        CHECK(d1 <= 180.0);
        CHECK(std::abs(d1 - d2) < 1e-9);
    }
}

TEST_CASE("axis_angle_to_quat") {
    Quat id = axis_angle_to_quat({0, 0, 1}, 0.0);
    CHECK(id.w == doctest::Approx(1.0));
    CHECK(id.z == doctest::Approx(0.0));

    Quat rz90 = axis_angle_to_quat({0, 0, 1}, 90.0);
    CHECK(rz90.w == doctest::Approx(std::sqrt(2.0) / 2.0));
    CHECK(rz90.z == doctest::Approx(std::sqrt(2.0) / 2.0));
    CHECK(rz90.x == 0.0);

    CHECK_THROWS(axis_angle_to_quat({0, 0, 0}, 10.0));

    // round trip through quat_angle
    Rng rng(5);
    for (int i = 0; i < 500; ++i) {
        Vec3 axis{rng.normal(), rng.normal(), rng.normal()};
        if (norm(axis) < 1e-6) continue;
        double angle = rng.uniform(0, 180);
        Quat q = axis_angle_to_quat(axis, angle);
        CHECK(std::abs(quat_angle(q, Quat::identity()) - angle) < 1e-9);
    }
}

TEST_CASE("rotation composition consistency") {
    Rng rng(17);
    for (int i = 0; i < 300; ++i) {
        Quat q1 = random_unit_quat(rng);
        Quat q2 = random_unit_quat(rng);
        Vec3 v{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        Vec3 a = quat_rotate(quat_normalize(quat_mul(q1, q2)), v);
        Vec3 b = quat_rotate(q1, quat_rotate(q2, v));
        CHECK(std::abs(a.x - b.x) < 1e-9);
        CHECK(std::abs(a.y - b.y) < 1e-9);
        CHECK(std::abs(a.z - b.z) < 1e-9);
    }
}

TEST_CASE("euler_from_quat basics") {
    auto e = euler_from_quat(Quat::identity());
    CHECK(e[0] == 0.0);
    CHECK(e[1] == 0.0);
    CHECK(e[2] == 0.0);

    auto ex = euler_from_quat(axis_angle_to_quat({1, 0, 0}, 90.0));
    CHECK(ex[0] == doctest::Approx(M_PI / 2));
    CHECK(ex[1] == doctest::Approx(0.0));
    CHECK(ex[2] == doctest::Approx(0.0));
}

TEST_CASE("euler round trip on 10000 random quaternions") {
    Rng rng(123);
    int tested = 0;
    for (int i = 0; i < 10000; ++i) {
        Quat q = random_unit_quat(rng);
        auto e = euler_from_quat(q);
        if (std::abs(e[1]) > 89.0 * M_PI / 180.0) continue;  // skip near gimbal lock
        ++tested;
        Quat r = quat_from_euler(e[0], e[1], e[2]);
        double dot = std::abs(q.w * r.w + q.x * r.x + q.y * r.y + q.z * r.z);
        CHECK(dot > 1.0 - 1e-6);
    }
    CHECK(tested > 9000);
}

TEST_CASE("gimbal lock is handled") {
    Quat lock = quat_from_euler(0.4, M_PI / 2, 0.0);
    auto e = euler_from_quat(quat_normalize(lock));
    CHECK(e[2] == 0.0);
    Quat r = quat_from_euler(e[0], e[1], e[2]);
    CHECK(quat_angle(quat_normalize(lock), r) < 1e-4);
}
