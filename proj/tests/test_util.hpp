#pragma once

#include "fgo/camera.hpp"
#include "fgo/pose.hpp"

namespace fgo::testutil {

/// World-to-camera pose for a camera at `eye` looking at `target`
/// (+z forward, +y down image convention).
inline RigidPose look_at(const Vec3& eye, const Vec3& target,
                         const Vec3& up_hint = Vec3(0, -1, 0)) {
    const Vec3 fwd = (target - eye).normalized();
    Vec3 right = up_hint.cross(fwd);
    if (right.norm() < 1e-6) right = Vec3(1, 0, 0).cross(fwd);
    right.normalize();
    const Vec3 down = fwd.cross(right).normalized();
    Mat3 r_wc;  // camera axes as world vectors
    r_wc.col(0) = right;
    r_wc.col(1) = down;
    r_wc.col(2) = fwd;
    RigidPose pose;
    pose.rotation = Quat(r_wc.transpose()).normalized();
    pose.translation = -(pose.rotation * eye);
    return pose;
}

inline PinholeCamera square_camera(int res, double focal) {
    PinholeCamera cam;
    cam.fx = cam.fy = focal;
    cam.cx = cam.cy = (res - 1) / 2.0;
    cam.width = cam.height = res;
    return cam;
}

}  // namespace fgo::testutil
