#include "fgo/umeyama.hpp"

#include "fgo/error.hpp"

#include <Eigen/Dense>

namespace fgo {

namespace {

// Second moment of a demeaned point set; used for the collinearity test.
Mat3 point_covariance(const std::vector<Vec3>& pts, const Vec3& mean) {
    Mat3 c = Mat3::Zero();
    for (const Vec3& p : pts) {
        const Vec3 d = p - mean;
        c += d * d.transpose();
    }
    return c / static_cast<double>(pts.size());
}

bool collinear(const Mat3& cov) {
    Eigen::SelfAdjointEigenSolver<Mat3> es(cov);
    const Vec3 ev = es.eigenvalues();  // ascending
    const double lead = std::sqrt(std::max(ev[2], 0.0));
    const double second = std::sqrt(std::max(ev[1], 0.0));
    return second < 1e-9 * std::max(lead, 1.0);
}

}  // namespace

SimilarityTransform umeyama_align(const std::vector<Vec3>& source,
                                  const std::vector<Vec3>& target,
                                  bool with_scale) {
    if (source.size() != target.size())
        throw Error("degenerate-configuration", "point count mismatch");
    const size_t n = source.size();
    if (n < 3)
        throw Error("degenerate-configuration",
                    "need at least 3 point pairs, got " + std::to_string(n));

    Vec3 mu_s = Vec3::Zero(), mu_t = Vec3::Zero();
    for (size_t i = 0; i < n; ++i) {
        mu_s += source[i];
        mu_t += target[i];
    }
    mu_s /= static_cast<double>(n);
    mu_t /= static_cast<double>(n);

    if (collinear(point_covariance(source, mu_s)) ||
        collinear(point_covariance(target, mu_t)))
        throw Error("degenerate-configuration", "points are collinear");

    Mat3 sigma = Mat3::Zero();
    double var_s = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const Vec3 ds = source[i] - mu_s;
        const Vec3 dt = target[i] - mu_t;
        sigma += dt * ds.transpose();
        var_s += ds.squaredNorm();
    }
    sigma /= static_cast<double>(n);
    var_s /= static_cast<double>(n);

    Eigen::JacobiSVD<Mat3> svd(sigma,
                               Eigen::ComputeFullU | Eigen::ComputeFullV);
    Vec3 s = Vec3::Ones();
    if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0)
        s[2] = -1.0;

    const Mat3 r = svd.matrixU() * s.asDiagonal() *
                   svd.matrixV().transpose();
    const double c =
        with_scale ? (svd.singularValues().dot(s)) / var_s : 1.0;

    SimilarityTransform t;
    t.scale = c;
    t.rotation = Quat(r).normalized();
    t.translation = mu_t - c * (r * mu_s);
    return t;
}

}  // namespace fgo
