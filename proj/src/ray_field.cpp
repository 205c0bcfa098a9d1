#include "fgo/ray_field.hpp"

#include <algorithm>
#include <cmath>

namespace fgo {

double eval_1d(const GaussianPrimitive& g, const Ray& ray, double d) {
    const auto [o_g, r_g] = to_gaussian_local(g, ray);
    return std::exp(-0.5 * (o_g + d * r_g).squaredNorm());
}

std::optional<MaxContribution> max_contribution(const GaussianPrimitive& g,
                                                const Ray& ray) {
    const auto [o_g, r_g] = to_gaussian_local(g, ray);
    const double b = r_g.squaredNorm();
    if (std::sqrt(b) <= 1e-12) return std::nullopt;
    const double a = o_g.dot(r_g);
    const double c = o_g.squaredNorm();
    MaxContribution m;
    m.d_star = -a / b;
    m.g_max = std::exp(-0.5 * std::max(0.0, c - a * a / b));
    m.dir_norm2 = b;
    return m;
}

namespace {

inline double response(const RayContribution& c, double d, CompositeMode mode) {
    if (mode == CompositeMode::kSaturating && d >= c.d_star) return c.g_max;
    return c.response_at(d);
}

// Slab test of a ray (unit direction) against an AABB, restricted to t >= 0.
bool ray_hits_aabb(const Ray& ray, const Vec3& lo, const Vec3& hi) {
    double tmin = 0.0;
    double tmax = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
        const double o = ray.origin[k];
        const double dir = ray.direction[k];
        if (std::abs(dir) < 1e-300) {
            if (o < lo[k] || o > hi[k]) return false;
            continue;
        }
        double t0 = (lo[k] - o) / dir;
        double t1 = (hi[k] - o) / dir;
        if (t0 > t1) std::swap(t0, t1);
        tmin = std::max(tmin, t0);
        tmax = std::min(tmax, t1);
        if (tmin > tmax) return false;
    }
    return true;
}

}  // namespace

double composite_opacity(const RaySample& sample,
                         const std::vector<double>& deltas, double d,
                         CompositeMode mode) {
    double acc = 0.0;
    double trans = 1.0;
    for (const RayContribution& c : sample.contributions) {
        const double alpha = deltas[c.gaussian_id] * response(c, d, mode);
        acc += alpha * trans;
        trans *= 1.0 - alpha;
    }
    return std::clamp(acc, 0.0, 1.0);
}

double transmittance(const RaySample& sample,
                     const std::vector<double>& deltas, double d,
                     CompositeMode mode) {
    double trans = 1.0;
    for (const RayContribution& c : sample.contributions)
        trans *= 1.0 - deltas[c.gaussian_id] * response(c, d, mode);
    return trans;
}

std::vector<double> mixing_weights(RaySample& sample,
                                   const std::vector<double>& deltas) {
    std::vector<double> w;
    w.reserve(sample.contributions.size());
    double trans = 1.0;
    for (RayContribution& c : sample.contributions) {
        const double alpha = deltas[c.gaussian_id] * c.g_max;
        c.weight = alpha * trans;
        w.push_back(c.weight);
        trans *= 1.0 - alpha;
    }
    return w;
}

RaySample build_ray_sample(const std::vector<GaussianPrimitive>& map,
                           const Ray& ray, double near_clip) {
    RaySample sample;
    sample.ray = ray;
    for (int i = 0; i < static_cast<int>(map.size()); ++i) {
        const GaussianPrimitive& g = map[i];
        const auto [lo, hi] = g.aabb(3.0);
        if (!ray_hits_aabb(ray, lo, hi)) continue;
        const auto m = max_contribution(g, ray);
        if (!m) continue;
        if (m->d_star <= near_clip) continue;
        if (g.opacity * m->g_max < kContributionCutoff) continue;
        RayContribution c;
        c.gaussian_id = i;
        c.d_star = m->d_star;
        c.g_max = m->g_max;
        c.dir_norm2 = m->dir_norm2;
        sample.contributions.push_back(c);
    }
    std::sort(sample.contributions.begin(), sample.contributions.end(),
              [](const RayContribution& a, const RayContribution& b) {
                  if (a.d_star != b.d_star) return a.d_star < b.d_star;
                  return a.gaussian_id < b.gaussian_id;
              });
    return sample;
}

std::optional<double> point_opacity(const Vec3& p,
                                    const std::vector<View>& views,
                                    const std::vector<GaussianPrimitive>& map,
                                    CompositeMode mode) {
    bool seen = false;
    double min_op = 1.0;
    const std::vector<double> deltas = map_opacities(map);
    for (const View& v : views) {
        const Vec3 pc = v.world_to_cam.apply(p);
        if (pc.z() <= kMinCameraDepth) continue;
        seen = true;
        const Ray ray = ray_through_point(v.world_to_cam, p);
        const double d = (p - ray.origin).norm();
        const RaySample sample = build_ray_sample(map, ray);
        min_op = std::min(min_op, composite_opacity(sample, deltas, d, mode));
        if (min_op <= 0.0) break;
    }
    if (!seen) return std::nullopt;
    return std::clamp(min_op, 0.0, 1.0);
}

std::vector<double> map_opacities(const std::vector<GaussianPrimitive>& map) {
    std::vector<double> d;
    d.reserve(map.size());
    for (const GaussianPrimitive& g : map) d.push_back(g.opacity);
    return d;
}

}  // namespace fgo
