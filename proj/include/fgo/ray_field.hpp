#pragma once

#include "fgo/gaussian.hpp"

#include <optional>
#include <vector>

namespace fgo {

/// Contributions with peak response delta * g_max below this are dropped
/// from ray samples (8-bit render precision).
constexpr double kContributionCutoff = 1.0 / 255.0;

/// One Gaussian's 1D response along a ray. d_star is the ray parameter of
/// maximum response (meters), g_max the peak value of the 1D Gaussian, and
/// dir_norm2 = |r_g|^2 the quadratic falloff coefficient, so the response at
/// any depth d is g_max * exp(-1/2 * dir_norm2 * (d - d_star)^2).
struct RayContribution {
    int gaussian_id = -1;
    double d_star = 0.0;
    double g_max = 0.0;
    double dir_norm2 = 1.0;
    double weight = 0.0;  // filled by mixing_weights

    double response_at(double d) const {
        const double dd = d - d_star;
        return g_max * std::exp(-0.5 * dir_norm2 * dd * dd);
    }
};

/// Per-ray compositing record: contributions sorted ascending by d_star,
/// ties broken by ascending gaussian_id.
struct RaySample {
    Ray ray;
    std::vector<RayContribution> contributions;
};

/// 1D Gaussian value exp(-1/2 |o_g + d r_g|^2) of g along the ray at depth d.
double eval_1d(const GaussianPrimitive& g, const Ray& ray, double d);

struct MaxContribution {
    double d_star = 0.0;
    double g_max = 0.0;
    double dir_norm2 = 0.0;
};

/// Peak of the 1D response: d_star = -(o_g . r_g)/(r_g . r_g). Returns
/// nullopt for a degenerate ray (|r_g| <= 1e-12 after whitening).
std::optional<MaxContribution> max_contribution(const GaussianPrimitive& g,
                                                const Ray& ray);

/// How per-contribution responses are evaluated when compositing at depth d.
/// kExact uses the raw 1D Gaussian value at d; kSaturating freezes each
/// contribution at its peak once d passes d_star, so opacity along a ray
/// rises to the peak and then stays constant.
enum class CompositeMode { kExact, kSaturating };

/// Front-to-back composite sum_i delta_i G_i(d) prod_{j<i} (1 - delta_j G_j(d))
/// over the sorted sample. `deltas` is indexed by gaussian_id. Result in [0,1].
double composite_opacity(const RaySample& sample,
                         const std::vector<double>& deltas, double d,
                         CompositeMode mode = CompositeMode::kExact);

/// Transmittance prod_j (1 - delta_j G_j(d)); the complement of the
/// composited opacity plus the emitted fraction telescopes to 1.
double transmittance(const RaySample& sample,
                     const std::vector<double>& deltas, double d,
                     CompositeMode mode = CompositeMode::kExact);

/// Mixing weights w_i = delta_i g_max_i prod_{j<i} (1 - delta_j g_max_j),
/// each contribution evaluated at its own peak. Also stored into the sample.
std::vector<double> mixing_weights(RaySample& sample,
                                   const std::vector<double>& deltas);

/// Builds the sorted contribution list for a ray: 3-sigma AABB reject, peak
/// evaluation, cutoff filter, and d_star > near_clip (in front of the origin).
RaySample build_ray_sample(const std::vector<GaussianPrimitive>& map,
                           const Ray& ray, double near_clip = 0.0);

struct View {
    RigidPose world_to_cam;
    PinholeCamera camera;
};

/// Globally consistent point opacity: minimum over views of the composited
/// opacity along the ray from the view's camera center through P, evaluated
/// at P's distance. Returns nullopt when P is behind every camera (callers
/// in surface extraction treat that as opacity 0).
std::optional<double> point_opacity(
    const Vec3& p, const std::vector<View>& views,
    const std::vector<GaussianPrimitive>& map,
    CompositeMode mode = CompositeMode::kSaturating);

/// Convenience: opacities of all Gaussians in map order.
std::vector<double> map_opacities(const std::vector<GaussianPrimitive>& map);

}  // namespace fgo
