#pragma once

#include "fgo/pose.hpp"
#include "fgo/types.hpp"

#include <optional>

namespace fgo {

struct PinholeCamera {
    double fx = 0, fy = 0;
    double cx = 0, cy = 0;
    int width = 0, height = 0;

    bool valid() const {
        return fx > 0 && fy > 0 && cx >= 0 && cx < width && cy >= 0 &&
               cy < height;
    }
};

/// World-frame ray with unit direction, so the ray parameter d is metric
/// distance in meters.
struct Ray {
    Vec3 origin = Vec3::Zero();
    Vec3 direction = Vec3::UnitZ();

    Vec3 at(double d) const { return origin + d * direction; }
};

constexpr double kMinCameraDepth = 1e-9;

/// Projects world point P through `pose` (world-to-camera). Returns nullopt
/// when the camera-frame depth is <= kMinCameraDepth; the caller must treat
/// that observation as invalid.
inline std::optional<Vec2> project(const PinholeCamera& cam,
                                   const RigidPose& world_to_cam,
                                   const Vec3& p_world) {
    const Vec3 pc = world_to_cam.apply(p_world);
    if (pc.z() <= kMinCameraDepth) return std::nullopt;
    return Vec2(cam.fx * pc.x() / pc.z() + cam.cx,
                cam.fy * pc.y() / pc.z() + cam.cy);
}

inline std::optional<Vec2> project_camera_frame(const PinholeCamera& cam,
                                                const Vec3& pc) {
    if (pc.z() <= kMinCameraDepth) return std::nullopt;
    return Vec2(cam.fx * pc.x() / pc.z() + cam.cx,
                cam.fy * pc.y() / pc.z() + cam.cy);
}

/// Camera center in world coordinates for a world-to-camera pose.
inline Vec3 camera_center(const RigidPose& world_to_cam) {
    return world_to_cam.rotation.conjugate() * (-world_to_cam.translation);
}

/// Back-projects pixel coordinates at camera-frame depth z. Pixel (u, v)
/// addresses image-plane coordinate (u, v) exactly; integer pixel indices
/// sample at integer coordinates.
inline Vec3 back_project(const PinholeCamera& cam, double u, double v,
                         double z) {
    return Vec3((u - cam.cx) / cam.fx * z, (v - cam.cy) / cam.fy * z, z);
}

/// World-frame ray through pixel coordinate (u, v).
inline Ray pixel_ray(const PinholeCamera& cam, const RigidPose& world_to_cam,
                     double u, double v) {
    const Vec3 dir_cam =
        Vec3((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0).normalized();
    Ray r;
    r.origin = camera_center(world_to_cam);
    r.direction = world_to_cam.rotation.conjugate() * dir_cam;
    return r;
}

/// Ray from the camera center through an arbitrary world point.
inline Ray ray_through_point(const RigidPose& world_to_cam, const Vec3& p) {
    Ray r;
    r.origin = camera_center(world_to_cam);
    r.direction = (p - r.origin).normalized();
    return r;
}

}  // namespace fgo
