#include "fgo/camera.hpp"
#include "fgo/error.hpp"
#include "fgo/gaussian.hpp"
#include "fgo/pose.hpp"
#include "fgo/rng.hpp"
#include "fgo/umeyama.hpp"

#include <doctest.h>

using namespace fgo;

namespace {

PinholeCamera test_camera() {
    PinholeCamera cam;
    cam.fx = cam.fy = 100.0;
    cam.cx = cam.cy = 50.0;
    cam.width = cam.height = 100;
    return cam;
}

GaussianPrimitive random_gaussian(Rng& rng) {
    GaussianPrimitive g;
    g.mean = rng.uniform_vec3(-1.0, 1.0);
    g.rotation = rng.random_rotation();
    g.scale = Vec3(rng.uniform(0.2, 2.0), rng.uniform(0.2, 2.0),
                   rng.uniform(0.2, 2.0));
    g.opacity = rng.uniform(0.1, 0.95);
    return g;
}

}  // namespace

TEST_CASE("rigid pose composition and inverse") {
    Rng rng(11);
    for (int i = 0; i < 20; ++i) {
        RigidPose p{rng.random_rotation(), rng.uniform_vec3(-2, 2)};
        RigidPose q{rng.random_rotation(), rng.uniform_vec3(-2, 2)};
        const Vec3 x = rng.uniform_vec3(-3, 3);
        CHECK((p.compose(q).apply(x) - p.apply(q.apply(x))).norm() < 1e-12);
        CHECK((p.compose(p.inverse()).apply(x) - x).norm() < 1e-9);
        CHECK(std::abs(p.rotation_matrix().determinant() - 1.0) < 1e-9);
    }
}

TEST_CASE("similarity transform reduces to rigid at scale 1") {
    Rng rng(12);
    RigidPose p{rng.random_rotation(), rng.uniform_vec3(-2, 2)};
    const SimilarityTransform s = SimilarityTransform::from_rigid(p);
    const Vec3 x = rng.uniform_vec3(-3, 3);
    CHECK((s.apply(x) - p.apply(x)).norm() < 1e-14);
    CHECK((s.compose(s.inverse()).apply(x) - x).norm() < 1e-12);
}

TEST_CASE("sim3 exp/log round trip and pow") {
    Rng rng(13);
    for (int i = 0; i < 50; ++i) {
        SimilarityTransform s;
        s.scale = std::exp(rng.uniform(-0.5, 0.5));
        s.rotation = rng.random_rotation();
        s.translation = rng.uniform_vec3(-2, 2);
        const SimilarityTransform r = sim3_exp(sim3_log(s));
        CHECK(std::abs(r.scale - s.scale) < 1e-10);
        CHECK((r.translation - s.translation).norm() < 1e-9);
        CHECK(std::abs(std::abs(r.rotation.dot(s.rotation)) - 1.0) < 1e-10);

        // pow(1) = s, pow(0) = identity, pow(0.5)^2 = s
        const SimilarityTransform h = sim3_pow(s, 0.5);
        const SimilarityTransform hh = h.compose(h);
        CHECK(std::abs(hh.scale - s.scale) < 1e-9);
        CHECK((hh.translation - s.translation).norm() < 1e-8);
        const SimilarityTransform id = sim3_pow(s, 0.0);
        CHECK(std::abs(id.scale - 1.0) < 1e-12);
        CHECK(id.translation.norm() < 1e-12);
    }
}

TEST_CASE("sim3 exp/log handles small rotations and scales") {
    SimilarityTransform s;
    s.scale = 1.0 + 1e-9;
    s.rotation = so3_exp(Vec3(1e-9, 0, 0));
    s.translation = Vec3(0.3, -0.2, 0.1);
    const SimilarityTransform r = sim3_exp(sim3_log(s));
    CHECK((r.translation - s.translation).norm() < 1e-12);
}

TEST_CASE("project: principal ray and offsets") {
    const PinholeCamera cam = test_camera();
    const RigidPose id;
    auto p = project(cam, id, Vec3(0, 0, 1));
    REQUIRE(p.has_value());
    CHECK((*p - Vec2(50, 50)).norm() < 1e-12);

    p = project(cam, id, Vec3(0.1, 0, 1));
    REQUIRE(p.has_value());
    CHECK((*p - Vec2(60, 50)).norm() < 1e-12);

    CHECK_FALSE(project(cam, id, Vec3(0, 0, -1)).has_value());
}

TEST_CASE("project equivariance under pose") {
    Rng rng(14);
    const PinholeCamera cam = test_camera();
    for (int i = 0; i < 30; ++i) {
        RigidPose pose{rng.random_rotation(), rng.uniform_vec3(-1, 1)};
        const Vec3 p = rng.uniform_vec3(-2, 2);
        const auto a = project(cam, pose, p);
        const auto b = project(cam, RigidPose::identity(), pose.apply(p));
        REQUIRE(a.has_value() == b.has_value());
        if (a) CHECK((*a - *b).norm() < 1e-10);
    }
}

TEST_CASE("pixel_ray passes through the projected point") {
    Rng rng(15);
    const PinholeCamera cam = test_camera();
    for (int i = 0; i < 20; ++i) {
        RigidPose pose{rng.random_rotation(), rng.uniform_vec3(-0.5, 0.5)};
        const Vec3 p = pose.inverse().apply(
            Vec3(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3),
                 rng.uniform(0.5, 3.0)));
        const auto px = project(cam, pose, p);
        REQUIRE(px.has_value());
        const Ray r = pixel_ray(cam, pose, px->x(), px->y());
        // Point lies on the ray.
        const Vec3 off = p - r.origin;
        CHECK((off - off.dot(r.direction) * r.direction).norm() < 1e-9);
        CHECK(std::abs(r.direction.norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("to_gaussian_local examples") {
    GaussianPrimitive g;  // isotropic, identity, at origin
    Ray ray{Vec3(0, 0, -2), Vec3(0, 0, 1)};
    auto [o1, r1] = to_gaussian_local(g, ray);
    CHECK((o1 - Vec3(0, 0, -2)).norm() < 1e-15);
    CHECK((r1 - Vec3(0, 0, 1)).norm() < 1e-15);

    g.mean = Vec3(1, 0, 0);
    auto [o2, r2] = to_gaussian_local(g, ray);
    CHECK((o2 - Vec3(-1, 0, -2)).norm() < 1e-15);
    CHECK((r2 - Vec3(0, 0, 1)).norm() < 1e-15);

    g.mean = Vec3::Zero();
    g.scale = Vec3(2, 1, 1);
    Ray ray2{Vec3(4, 0, 0), Vec3(-1, 0, 0)};
    auto [o3, r3] = to_gaussian_local(g, ray2);
    CHECK((o3 - Vec3(2, 0, 0)).norm() < 1e-15);
    CHECK((r3 - Vec3(-0.5, 0, 0)).norm() < 1e-15);
}

TEST_CASE("to_gaussian_local round trip") {
    Rng rng(16);
    for (int i = 0; i < 30; ++i) {
        const GaussianPrimitive g = random_gaussian(rng);
        Ray ray{rng.uniform_vec3(-3, 3), rng.unit_vec3()};
        auto [o_g, r_g] = to_gaussian_local(g, ray);
        // Inverse map: x = R S x_g + mean (direction without the offset).
        const Mat3 rs = g.rotation.toRotationMatrix() * g.scale.asDiagonal();
        CHECK((rs * o_g + g.mean - ray.origin).norm() < 1e-9);
        CHECK((rs * r_g - ray.direction).norm() < 1e-9);
    }
}

TEST_CASE("local-frame density equals world-frame Mahalanobis density") {
    Rng rng(17);
    for (int i = 0; i < 30; ++i) {
        const GaussianPrimitive g = random_gaussian(rng);
        const Vec3 x = rng.uniform_vec3(-3, 3);
        const Vec3 local = g.whitening() * (x - g.mean);
        const double from_local = std::exp(-0.5 * local.squaredNorm());
        const double mahal =
            (x - g.mean).transpose() * g.inverse_covariance() * (x - g.mean);
        CHECK(std::abs(from_local - std::exp(-0.5 * mahal)) < 1e-9);
    }
}

TEST_CASE("umeyama: identity and pure scale") {
    Rng rng(18);
    std::vector<Vec3> src;
    for (int i = 0; i < 10; ++i) src.push_back(rng.uniform_vec3(-2, 2));

    SUBCASE("identity") {
        const auto t = umeyama_align(src, src, true);
        CHECK(std::abs(t.scale - 1.0) < 1e-12);
        CHECK(t.translation.norm() < 1e-12);
        CHECK(std::abs(std::abs(t.rotation.w()) - 1.0) < 1e-12);
    }
    SUBCASE("pure scale 2") {
        std::vector<Vec3> tgt;
        for (const auto& p : src) tgt.push_back(2.0 * p);
        const auto t = umeyama_align(src, tgt, true);
        CHECK(std::abs(t.scale - 2.0) < 1e-12);
        CHECK(t.translation.norm() < 1e-10);
    }
}

TEST_CASE("umeyama recovers a known similarity") {
    Rng rng(19);
    for (int trial = 0; trial < 10; ++trial) {
        SimilarityTransform gt;
        gt.scale = std::exp(rng.uniform(-0.7, 0.7));
        gt.rotation = rng.random_rotation();
        gt.translation = rng.uniform_vec3(-2, 2);

        std::vector<Vec3> src, tgt;
        for (int i = 0; i < 10; ++i) {
            src.push_back(rng.uniform_vec3(-2, 2));
            tgt.push_back(gt.apply(src.back()));
        }
        const auto t = umeyama_align(src, tgt, true);
        CHECK(std::abs(t.scale - gt.scale) < 1e-9);
        CHECK((t.translation - gt.translation).norm() < 1e-9);
        for (size_t i = 0; i < src.size(); ++i)
            CHECK((t.apply(src[i]) - tgt[i]).norm() < 1e-9);

        // Rigid mode on rigid data
        if (std::abs(gt.scale - 1.0) < 1e-12) {
            const auto r = umeyama_align(src, tgt, false);
            CHECK(std::abs(r.scale - 1.0) < 1e-15);
        }
    }
}

TEST_CASE("umeyama rejects degenerate configurations") {
    std::vector<Vec3> line, tgt;
    for (int i = 0; i < 5; ++i) {
        line.push_back(Vec3(i, 2.0 * i, -i));
        tgt.push_back(Vec3(i, 2.0 * i, -i));
    }
    CHECK_THROWS_AS(umeyama_align(line, tgt, true), Error);

    std::vector<Vec3> two{Vec3(0, 0, 0), Vec3(1, 1, 1)};
    CHECK_THROWS_AS(umeyama_align(two, two, false), Error);
}
