#pragma once

#include "fgo/camera.hpp"
#include "fgo/types.hpp"

#include <utility>

namespace fgo {

/// Anisotropic 3D Gaussian scene primitive. `scale` holds per-axis standard
/// deviations in meters (all > 0); covariance is R * diag(scale)^2 * R^T.
struct GaussianPrimitive {
    Vec3 mean = Vec3::Zero();
    Quat rotation = Quat::Identity();
    Vec3 scale = Vec3::Ones();
    double opacity = 0.5;  // in [0,1]
    Vec3 color = Vec3::Zero();  // RGB in [0,1]

    Mat3 covariance() const {
        const Mat3 r = rotation.toRotationMatrix();
        return r * scale.array().square().matrix().asDiagonal() * r.transpose();
    }

    Mat3 inverse_covariance() const {
        const Mat3 r = rotation.toRotationMatrix();
        return r * scale.array().square().inverse().matrix().asDiagonal() *
               r.transpose();
    }

    /// Whitening map into the Gaussian's local frame: x_g = S^-1 R^T (x - mean).
    Mat3 whitening() const {
        return scale.array().inverse().matrix().asDiagonal() *
               rotation.toRotationMatrix().transpose();
    }

    /// Unnormalized density exp(-1/2 (x-mean)^T Sigma^-1 (x-mean)).
    double density(const Vec3& x) const {
        const Vec3 local = whitening() * (x - mean);
        return std::exp(-0.5 * local.squaredNorm());
    }

    /// Axis-aligned bounding box of the k-sigma ellipsoid (world frame).
    /// Half-extent per world axis is the norm of the corresponding row of
    /// R * diag(scale), times k.
    std::pair<Vec3, Vec3> aabb(double k_sigma) const {
        const Mat3 rs = rotation.toRotationMatrix() * scale.asDiagonal();
        const Vec3 half = k_sigma * rs.rowwise().norm();
        return {mean - half, mean + half};
    }
};

/// Maps a world ray into the Gaussian's whitened local frame. The direction
/// is intentionally not renormalized so the 1D ray parameter keeps its
/// world-metric meaning.
inline std::pair<Vec3, Vec3> to_gaussian_local(const GaussianPrimitive& g,
                                               const Ray& ray) {
    const Mat3 m = g.whitening();
    return {m * (ray.origin - g.mean), m * ray.direction};
}

}  // namespace fgo
