#pragma once

#include "fgo/camera.hpp"
#include "fgo/pose.hpp"
#include "fgo/types.hpp"
#include "fgo/umeyama.hpp"

#include <optional>
#include <vector>

namespace fgo {

/// Triangulated 3D point with its 2D (and optionally depth) observations.
struct MapPoint {
    struct Obs {
        int keyframe_id = -1;
        Vec2 pixel = Vec2::Zero();
        double sigma2 = 1.0;  // pixel^2
        std::optional<double> depth;  // camera-frame z, meters (rgbd)
    };

    int id = -1;
    Vec3 position = Vec3::Zero();
    std::vector<Obs> observations;
};

struct Keyframe {
    int id = -1;
    double timestamp = 0.0;
    RigidPose pose;  // world-to-camera
    PinholeCamera camera;
    Image image;  // H x W x 3 color
    Image depth;  // H x W x 1 meters, empty when unavailable
    std::vector<int> observed_points;

    bool has_depth() const { return !depth.data.empty(); }
};

/// Sim(3) loop constraint between an old keyframe a and the current
/// keyframe b. `correction` is the world-side similarity that maps geometry
/// anchored at b's (drifted) epoch onto the a-side map, i.e.
/// x_a_side ~= correction(x_b_side).
struct LoopConstraint {
    int keyframe_a = -1;
    int keyframe_b = -1;
    SimilarityTransform correction;
    std::vector<std::pair<Vec3, Vec3>> matched_pairs;  // (b-side, a-side)
};

struct TrackingConfig {
    double huber_threshold = 2.447;  // 95% chi-square, 2 dof, normalized units
    int pose_max_iterations = 100;
    double pose_step_tolerance = 1e-8;
    int ba_max_iterations = 50;
    double ba_relative_tolerance = 1e-10;
    double depth_sigma = 0.02;  // meters, rgbd residual weighting
    int loop_min_gap = 50;
    double loop_overlap_threshold = 0.3;
    double keyframe_overlap_threshold = 0.9;
    double keyframe_translation_threshold = 0.05;  // fraction of scene extent
    bool mono = true;  // mono gauge handling in global BA
};

/// Robust reprojection cost: sum over observations of
/// 1/2 * huber(r^T Sigma^-1 r) with r the pixel residual.
/// Observations behind the camera are excluded. Throws
/// Error("dangling-reference") on bad ids.
double reprojection_cost(const std::vector<MapPoint>& points,
                         const std::vector<Keyframe>& keyframes,
                         const TrackingConfig& cfg);

struct PoseEstimate {
    RigidPose pose;
    bool converged = false;
    double final_cost = 0.0;
    int iterations = 0;
};

/// Pose-only Levenberg-Marquardt on SE(3) over one frame's observations of
/// known points. Throws Error("insufficient-observations") for < 6 usable
/// observations; a non-converged run returns best-so-far with the flag off.
PoseEstimate estimate_pose(const std::vector<MapPoint::Obs>& observations,
                           const std::vector<Vec3>& points,
                           const PinholeCamera& camera,
                           const RigidPose& initial,
                           const TrackingConfig& cfg);

/// Midpoint of closest approach of the two back-projected rays. Throws
/// Error("degenerate-parallax") when the rays are parallel within 1e-6 or
/// the baseline is zero.
Vec3 triangulate(const Vec2& pixel_a, const Vec2& pixel_b,
                 const RigidPose& pose_a, const RigidPose& pose_b,
                 const PinholeCamera& camera_a, const PinholeCamera& camera_b);

/// Ground-simulated proximity loop detection: a candidate old keyframe whose
/// co-visible point overlap with the current frame exceeds the threshold and
/// whose id gap is at least loop_min_gap. `covisible_group` maps each map
/// point id to a shared group id (points observing the same physical
/// landmark share a group); pass point ids themselves when the map has no
/// duplicates. Returns the constraint with the relative similarity from
/// umeyama over the matched pair positions, or nullopt.
std::optional<LoopConstraint> detect_loop(
    const std::vector<Keyframe>& keyframes,
    const std::vector<MapPoint>& points,
    const std::vector<int>& covisible_group, int current_id,
    const TrackingConfig& cfg);

/// Propagates the loop similarity over keyframes with id > a, blended with
/// identity by normalized id distance; map points move with their last
/// observing keyframe; matched duplicate pairs are fused; then global BA.
void correct_loop(std::vector<Keyframe>& keyframes,
                  std::vector<MapPoint>& points,
                  const LoopConstraint& constraint,
                  const TrackingConfig& cfg);

struct BaResult {
    bool converged = false;
    double initial_cost = 0.0;
    double final_cost = 0.0;
    int iterations = 0;
};

/// Joint Levenberg-Marquardt over all keyframe poses and points with Schur
/// elimination of the point blocks. Keyframe 0 is the gauge anchor; in mono
/// mode the 0-1 baseline norm is restored after convergence (a reprojection
/// -invariant rescale). Accepted steps strictly decrease the robust cost.
BaResult global_ba(std::vector<Keyframe>& keyframes,
                   std::vector<MapPoint>& points, const TrackingConfig& cfg);

}  // namespace fgo
