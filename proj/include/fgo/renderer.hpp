#pragma once

#include "fgo/ray_field.hpp"
#include "fgo/types.hpp"

#include <vector>

namespace fgo {

/// Forward render output. depth is the alpha-normalized mixing-weighted mean
/// of peak depths (0 where alpha < kMinRenderAlpha); normal rows are unit
/// world-frame vectors or exactly zero; alpha is the per-pixel weight sum.
struct RenderedFrame {
    Image color;   // H x W x 3
    Image depth;   // H x W x 1, meters
    Image normal;  // H x W x 3
    Image alpha;   // H x W x 1
};

constexpr double kMinRenderAlpha = 1e-4;
constexpr double kDepthNormEps = 1e-8;

/// World-frame normal of the density level surface where the ray meets the
/// Gaussian at its point of maximum contribution: the normalized negative
/// gradient direction -Sigma^-1 (x - mean), flipped to face the ray origin.
/// Falls back to the shortest principal axis when the point coincides with
/// the mean.
Vec3 gaussian_normal(const GaussianPrimitive& g, const Ray& ray);
Vec3 gaussian_normal_at(const GaussianPrimitive& g, const Ray& ray,
                        double d_star);

/// Per-pixel exact ray evaluation with 3-sigma AABB rejection; contributions
/// sorted by peak depth and alpha-blended front to back.
RenderedFrame render(const PinholeCamera& camera, const RigidPose& world_to_cam,
                     const std::vector<GaussianPrimitive>& map);

/// As render(), additionally returning the per-pixel ray samples (row-major,
/// mixing weights filled) for loss evaluation.
RenderedFrame render_with_samples(const PinholeCamera& camera,
                                  const RigidPose& world_to_cam,
                                  const std::vector<GaussianPrimitive>& map,
                                  std::vector<RaySample>* samples_out);

/// Camera-frame normals from the depth map gradient: back-project each valid
/// pixel and its right/down neighbors, normal = normalize(cross(Pr-P, Pd-P)),
/// sign toward the camera, zero where any of the three depths is invalid.
Image depth_to_normal(const Image& depth, const PinholeCamera& camera);

}  // namespace fgo
