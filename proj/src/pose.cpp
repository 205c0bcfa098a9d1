#include "fgo/pose.hpp"

#include <cmath>

namespace fgo {

Mat3 skew(const Vec3& v) {
    Mat3 m;
    m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
    return m;
}

Quat so3_exp(const Vec3& phi) {
    const double theta = phi.norm();
    if (theta < 1e-12) {
        Quat q(1.0, 0.5 * phi.x(), 0.5 * phi.y(), 0.5 * phi.z());
        q.normalize();
        return q;
    }
    return Quat(Eigen::AngleAxisd(theta, phi / theta));
}

Vec3 so3_log(const Quat& q) {
    Eigen::AngleAxisd aa(q.normalized());
    double angle = aa.angle();
    // Map to (-pi, pi] for a unique tangent.
    if (angle > M_PI) angle -= 2.0 * M_PI;
    return angle * aa.axis();
}

namespace {

// W(phi, sigma) = integral_0^1 exp(sigma*u) * Exp(u*phi) du. Closed forms
// with Taylor fallbacks near sigma = 0 and theta = 0.
Mat3 sim3_w_matrix(const Vec3& phi, double sigma) {
    const double theta = phi.norm();
    const double es = std::exp(sigma);
    constexpr double kEps = 1e-6;

    double i0;  // integral of e^{sigma u}
    if (std::abs(sigma) < kEps)
        i0 = 1.0 + sigma / 2.0 + sigma * sigma / 6.0;
    else
        i0 = (es - 1.0) / sigma;

    double c1;  // coefficient of hat(phi):   integral e^{su} sin(u theta) / theta
    double c2;  // coefficient of hat(phi)^2: (i0 - integral e^{su} cos(u theta)) / theta^2
    if (theta < kEps) {
        if (std::abs(sigma) < kEps) {
            c1 = 0.5 + sigma / 3.0;
            c2 = 1.0 / 6.0 + sigma / 8.0;
        } else {
            c1 = (es * (sigma - 1.0) + 1.0) / (sigma * sigma);
            c2 = (es * (sigma * sigma - 2.0 * sigma + 2.0) - 2.0) /
                 (2.0 * sigma * sigma * sigma);
        }
    } else {
        const double d = sigma * sigma + theta * theta;
        const double is = (es * (sigma * std::sin(theta) - theta * std::cos(theta)) + theta) / d;
        const double ic = (es * (sigma * std::cos(theta) + theta * std::sin(theta)) - sigma) / d;
        c1 = is / theta;
        c2 = (i0 - ic) / (theta * theta);
    }

    const Mat3 k = skew(phi);
    return i0 * Mat3::Identity() + c1 * k + c2 * (k * k);
}

}  // namespace

SimilarityTransform sim3_exp(const Sim3Tangent& t) {
    SimilarityTransform s;
    s.scale = std::exp(t.sigma);
    s.rotation = so3_exp(t.phi);
    s.translation = sim3_w_matrix(t.phi, t.sigma) * t.rho;
    return s;
}

Sim3Tangent sim3_log(const SimilarityTransform& s) {
    Sim3Tangent t;
    t.sigma = std::log(s.scale);
    t.phi = so3_log(s.rotation);
    t.rho = sim3_w_matrix(t.phi, t.sigma).partialPivLu().solve(s.translation);
    return t;
}

SimilarityTransform sim3_pow(const SimilarityTransform& s, double w) {
    Sim3Tangent t = sim3_log(s);
    t.rho *= w;
    t.phi *= w;
    t.sigma *= w;
    return sim3_exp(t);
}

}  // namespace fgo
