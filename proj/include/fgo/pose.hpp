#pragma once

#include "fgo/types.hpp"

namespace fgo {

/// Rigid body transform. `apply` maps a point x to `rotation * x + translation`.
/// Used both for world-to-camera extrinsics and camera-to-world poses; which
/// one is meant is stated at the use site.
struct RigidPose {
    Quat rotation = Quat::Identity();
    Vec3 translation = Vec3::Zero();

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

    RigidPose inverse() const {
        const Quat qi = rotation.conjugate();
        return {qi, qi * (-translation)};
    }

    /// this ∘ other: apply `other` first, then `this`.
    RigidPose compose(const RigidPose& other) const {
        return {(rotation * other.rotation).normalized(),
                rotation * other.translation + translation};
    }

    Mat3 rotation_matrix() const { return rotation.toRotationMatrix(); }

    static RigidPose identity() { return {}; }
};

/// Similarity transform: x -> scale * (rotation * x) + translation.
struct SimilarityTransform {
    double scale = 1.0;
    Quat rotation = Quat::Identity();
    Vec3 translation = Vec3::Zero();

    Vec3 apply(const Vec3& p) const {
        return scale * (rotation * p) + translation;
    }

    SimilarityTransform inverse() const {
        const Quat qi = rotation.conjugate();
        return {1.0 / scale, qi, qi * (translation * (-1.0 / scale))};
    }

    SimilarityTransform compose(const SimilarityTransform& other) const {
        return {scale * other.scale, (rotation * other.rotation).normalized(),
                scale * (rotation * other.translation) + translation};
    }

    static SimilarityTransform from_rigid(const RigidPose& p) {
        return {1.0, p.rotation, p.translation};
    }

    /// Drops the scale into the translation-free part: rotation kept, the
    /// returned pose maps x to rotation*x + translation (scale ignored).
    RigidPose to_rigid_dropping_scale() const { return {rotation, translation}; }

    static SimilarityTransform identity() { return {}; }
};

/// Sim(3) tangent vector: translational part rho, rotational part phi
/// (axis-angle), log-scale sigma.
struct Sim3Tangent {
    Vec3 rho = Vec3::Zero();
    Vec3 phi = Vec3::Zero();
    double sigma = 0.0;
};

Sim3Tangent sim3_log(const SimilarityTransform& s);
SimilarityTransform sim3_exp(const Sim3Tangent& t);

/// Fractional power via exp(w * log(S)). w=0 gives identity, w=1 gives s.
SimilarityTransform sim3_pow(const SimilarityTransform& s, double w);

Mat3 skew(const Vec3& v);

/// exp of so(3): axis-angle vector to rotation.
Quat so3_exp(const Vec3& phi);
Vec3 so3_log(const Quat& q);

}  // namespace fgo
