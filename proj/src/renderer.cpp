#include "fgo/renderer.hpp"

#include "fgo/parallel.hpp"

#include <cmath>

namespace fgo {

Vec3 gaussian_normal_at(const GaussianPrimitive& g, const Ray& ray,
                        double d_star) {
    const Vec3 x = ray.at(d_star);
    const Vec3 off = x - g.mean;
    Vec3 n;
    if (off.norm() > 1e-9) {
        n = (-(g.inverse_covariance() * off)).normalized();
    } else {
        int k;
        g.scale.minCoeff(&k);
        n = g.rotation.toRotationMatrix().col(k);
    }
    // At d_star the gradient is exactly ray-perpendicular (stationarity), so
    // the camera-facing flip only ever acts on the fallback branch; the
    // tolerance keeps fp noise from flipping the sign.
    if (n.dot(ray.direction) > 1e-6) n = -n;
    return n;
}

Vec3 gaussian_normal(const GaussianPrimitive& g, const Ray& ray) {
    const auto m = max_contribution(g, ray);
    const double d = m ? m->d_star : 0.0;
    return gaussian_normal_at(g, ray, d);
}

RenderedFrame render_with_samples(const PinholeCamera& camera,
                                  const RigidPose& world_to_cam,
                                  const std::vector<GaussianPrimitive>& map,
                                  std::vector<RaySample>* samples_out) {
    const int h = camera.height;
    const int w = camera.width;
    RenderedFrame frame;
    frame.color = Image(h, w, 3);
    frame.depth = Image(h, w, 1);
    frame.normal = Image(h, w, 3);
    frame.alpha = Image(h, w, 1);
    if (samples_out) samples_out->assign(static_cast<size_t>(h) * w, {});

    const std::vector<double> deltas = map_opacities(map);

    parallel_for_blocks(h * w, [&](int, int begin, int end) {
        for (int idx = begin; idx < end; ++idx) {
            const int y = idx / w;
            const int x = idx % w;
            const Ray ray = pixel_ray(camera, world_to_cam, x, y);
            RaySample sample = build_ray_sample(map, ray);
            mixing_weights(sample, deltas);

            Vec3 color = Vec3::Zero();
            Vec3 normal = Vec3::Zero();
            double depth_num = 0.0;
            double alpha = 0.0;
            for (const RayContribution& c : sample.contributions) {
                const GaussianPrimitive& g = map[c.gaussian_id];
                color += c.weight * g.color;
                depth_num += c.weight * c.d_star;
                normal += c.weight * gaussian_normal_at(g, ray, c.d_star);
                alpha += c.weight;
            }
            frame.color.set_rgb(y, x, color);
            frame.alpha.at(y, x) = alpha;
            frame.depth.at(y, x) =
                alpha < kMinRenderAlpha
                    ? 0.0
                    : depth_num / std::max(alpha, kDepthNormEps);
            if (normal.norm() > 0.0)
                frame.normal.set_rgb(y, x, normal.normalized());
            if (samples_out) (*samples_out)[idx] = std::move(sample);
        }
    });
    return frame;
}

RenderedFrame render(const PinholeCamera& camera, const RigidPose& world_to_cam,
                     const std::vector<GaussianPrimitive>& map) {
    return render_with_samples(camera, world_to_cam, map, nullptr);
}

Image depth_to_normal(const Image& depth, const PinholeCamera& camera) {
    Image normals(depth.height, depth.width, 3);
    for (int y = 0; y + 1 < depth.height; ++y) {
        for (int x = 0; x + 1 < depth.width; ++x) {
            const double z0 = depth.at(y, x);
            const double zr = depth.at(y, x + 1);
            const double zd = depth.at(y + 1, x);
            if (z0 <= 0.0 || zr <= 0.0 || zd <= 0.0) continue;
            const Vec3 p0 = back_project(camera, x, y, z0);
            const Vec3 pr = back_project(camera, x + 1, y, zr);
            const Vec3 pd = back_project(camera, x, y + 1, zd);
            Vec3 n = (pr - p0).cross(pd - p0);
            const double len = n.norm();
            if (len < 1e-15) continue;
            n /= len;
            if (n.dot(p0) > 0.0) n = -n;
            normals.set_rgb(y, x, n);
        }
    }
    return normals;
}

}  // namespace fgo
