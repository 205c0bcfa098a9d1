#pragma once

#include "fgo/renderer.hpp"
#include "fgo/types.hpp"

#include <vector>

namespace fgo {

/// Per-term loss values. total = color_weight*color + alpha*distortion +
/// beta*normal with the weights the evaluation was configured with.
struct LossBreakdown {
    double color = 0.0;
    double distortion = 0.0;
    double normal = 0.0;
    double total = 0.0;
};

struct MapLossConfig {
    double lambda_dssim = 0.2;
    double alpha = 1000.0;  // depth distortion weight, in [100, 1000]
    double beta = 0.05;     // normal consistency weight
    double color_weight = 1.0;  // kept at 1 in production; tests isolate terms
};

/// Unconstrained per-Gaussian parameterization used by the optimizer:
/// raw quaternion (normalized on materialization), log scales, logit
/// opacity, raw color.
struct MapParams {
    std::vector<Vec3> mean;
    std::vector<Vec4> quat;  // (w, x, y, z)
    std::vector<Vec3> log_scale;
    std::vector<double> logit_opacity;
    std::vector<Vec3> color;

    size_t size() const { return mean.size(); }

    static MapParams from_primitives(const std::vector<GaussianPrimitive>& g);
    std::vector<GaussianPrimitive> to_primitives() const;
};

/// Gradient of a scalar loss with respect to MapParams, same layout.
struct MapGradient {
    std::vector<Vec3> mean;
    std::vector<Vec4> quat;
    std::vector<Vec3> log_scale;
    std::vector<double> logit_opacity;
    std::vector<Vec3> color;

    void resize_zero(size_t n);
    void axpy(double a, const MapGradient& other);
    double squared_norm() const;
};

/// Per-pixel mixing weights keyed by gaussian id; passed back in to freeze
/// the distortion loss's weights while depths vary (its weight-path gradient
/// is identically zero by construction).
using PixelWeights = std::vector<std::vector<std::pair<int, double>>>;

struct LossResult {
    LossBreakdown loss;
    RenderedFrame frame;
    PixelWeights weights;
};

/// Evaluates the mapping objective for one keyframe: L1 + D-SSIM color loss,
/// depth distortion over peak depths with decoupled weights, and depth-normal
/// consistency. When `grad` is non-null it receives d(total)/d(params),
/// accumulated deterministically. `frozen_distortion_weights`, when given,
/// replaces the live mixing weights inside the distortion term only.
LossResult evaluate_map_loss(
    const MapParams& params, const PinholeCamera& camera,
    const RigidPose& world_to_cam, const Image& target,
    const MapLossConfig& cfg, MapGradient* grad = nullptr,
    const PixelWeights* frozen_distortion_weights = nullptr);

/// Color reconstruction loss alone: (1-lambda)*mean|a-b| +
/// lambda*(1-SSIM(a,b))/2. Throws on shape mismatch.
double color_loss(const Image& rendered, const Image& target,
                  double lambda_dssim);

/// Depth distortion over a set of per-pixel ray samples (weights filled):
/// mean over pixels of sum_{i,j} w_i w_j |d_i - d_j|.
double depth_distortion_loss(const std::vector<RaySample>& pixel_samples);

/// Mean over valid pixels (nonzero N) of sum_i w_i (1 - n_i . N). `normals`
/// holds one unit vector per contribution of the matching sample.
double normal_consistency_loss(
    const std::vector<RaySample>& pixel_samples,
    const std::vector<std::vector<Vec3>>& normals,
    const std::vector<Vec3>& pixel_normals);

LossBreakdown assemble_total(double color, double distortion, double normal,
                             const MapLossConfig& cfg);

double sigmoid(double x);
double logit(double p);

}  // namespace fgo
