#include "fgo/losses.hpp"

#include "fgo/error.hpp"
#include "fgo/parallel.hpp"
#include "fgo/ssim.hpp"

#include <cmath>

namespace fgo {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

MapParams MapParams::from_primitives(const std::vector<GaussianPrimitive>& g) {
    MapParams p;
    p.mean.reserve(g.size());
    for (const auto& gi : g) {
        p.mean.push_back(gi.mean);
        const Quat q = gi.rotation.normalized();
        p.quat.push_back(Vec4(q.w(), q.x(), q.y(), q.z()));
        p.log_scale.push_back(gi.scale.array().log().matrix());
        p.logit_opacity.push_back(
            logit(std::clamp(gi.opacity, 1e-6, 1.0 - 1e-6)));
        p.color.push_back(gi.color);
    }
    return p;
}

std::vector<GaussianPrimitive> MapParams::to_primitives() const {
    std::vector<GaussianPrimitive> g(size());
    for (size_t i = 0; i < size(); ++i) {
        g[i].mean = mean[i];
        g[i].rotation =
            Quat(quat[i][0], quat[i][1], quat[i][2], quat[i][3]).normalized();
        g[i].scale = log_scale[i].array().exp().matrix();
        g[i].opacity = sigmoid(logit_opacity[i]);
        g[i].color = color[i];
    }
    return g;
}

void MapGradient::resize_zero(size_t n) {
    mean.assign(n, Vec3::Zero());
    quat.assign(n, Vec4::Zero());
    log_scale.assign(n, Vec3::Zero());
    logit_opacity.assign(n, 0.0);
    color.assign(n, Vec3::Zero());
}

void MapGradient::axpy(double a, const MapGradient& o) {
    for (size_t i = 0; i < mean.size(); ++i) {
        mean[i] += a * o.mean[i];
        quat[i] += a * o.quat[i];
        log_scale[i] += a * o.log_scale[i];
        logit_opacity[i] += a * o.logit_opacity[i];
        color[i] += a * o.color[i];
    }
}

double MapGradient::squared_norm() const {
    double s = 0.0;
    for (size_t i = 0; i < mean.size(); ++i) {
        s += mean[i].squaredNorm() + quat[i].squaredNorm() +
             log_scale[i].squaredNorm() +
             logit_opacity[i] * logit_opacity[i] + color[i].squaredNorm();
    }
    return s;
}

double color_loss(const Image& rendered, const Image& target,
                  double lambda_dssim) {
    if (!rendered.same_shape(target))
        throw Error("shape-mismatch", "color_loss inputs differ");
    double l1 = 0.0;
    for (size_t i = 0; i < rendered.size(); ++i)
        l1 += std::abs(rendered.data[i] - target.data[i]);
    l1 /= static_cast<double>(rendered.size());
    double result = (1.0 - lambda_dssim) * l1;
    if (lambda_dssim > 0.0)
        result += lambda_dssim * (1.0 - ssim(rendered, target)) / 2.0;
    return result;
}

double depth_distortion_loss(const std::vector<RaySample>& pixel_samples) {
    if (pixel_samples.empty()) return 0.0;
    double total = 0.0;
    for (const RaySample& s : pixel_samples) {
        double pref_w = 0.0, pref_wd = 0.0;
        for (const RayContribution& c : s.contributions) {
            total += 2.0 * c.weight * (c.d_star * pref_w - pref_wd);
            pref_w += c.weight;
            pref_wd += c.weight * c.d_star;
        }
    }
    return total / static_cast<double>(pixel_samples.size());
}

double normal_consistency_loss(
    const std::vector<RaySample>& pixel_samples,
    const std::vector<std::vector<Vec3>>& normals,
    const std::vector<Vec3>& pixel_normals) {
    double total = 0.0;
    int valid = 0;
    for (size_t p = 0; p < pixel_samples.size(); ++p) {
        if (pixel_normals[p].norm() == 0.0) continue;
        ++valid;
        const auto& cs = pixel_samples[p].contributions;
        for (size_t i = 0; i < cs.size(); ++i)
            total += cs[i].weight *
                     (1.0 - normals[p][i].dot(pixel_normals[p]));
    }
    return valid > 0 ? total / valid : 0.0;
}

LossBreakdown assemble_total(double color, double distortion, double normal,
                             const MapLossConfig& cfg) {
    LossBreakdown b;
    b.color = color;
    b.distortion = distortion;
    b.normal = normal;
    b.total = cfg.color_weight * color + cfg.alpha * distortion +
              cfg.beta * normal;
    return b;
}

namespace {

constexpr double kMaxAlpha = 1.0 - 1e-4;

// One Gaussian's cached forward state at a pixel; everything the backward
// pass needs to chain from the loss adjoints to the parameters.
struct ContribCache {
    int id = -1;
    double d_star = 0, g_max = 0;
    double a_coef = 0, b_coef = 0, c_coef = 0;  // o.r, |r|^2, |o|^2
    double alpha = 0, trans_before = 1, weight = 0;
    bool alpha_clamped = false;
    Vec3 o_g, r_g;
    // Normal intermediates.
    Vec3 normal, v, m;
    double m_norm = 0, sign = 1;
    bool normal_fallback = false;
};

struct PixelCache {
    Vec3 dir;  // world ray direction (unit)
    std::vector<ContribCache> contribs;
    Vec3 color = Vec3::Zero();
    double weight_sum = 0, depth_num = 0;
};

// Per-Gaussian static data reused across pixels.
struct GaussData {
    Mat3 rot;        // R
    Mat3 whiten;     // S^-1 R^T
    Mat3 inv_cov;    // R S^-2 R^T
    Vec3 inv_scale;  // 1/s
    Vec3 d2;         // s^-2
    Vec3 shortest_axis;
};

// Accumulated parameter-space gradients before the quaternion/logit
// reparameterization.
struct RawGrad {
    std::vector<Vec3> mean;
    std::vector<Mat3> rot;
    std::vector<Vec3> log_scale;
    std::vector<double> delta;
    std::vector<Vec3> color;

    void resize_zero(size_t n) {
        mean.assign(n, Vec3::Zero());
        rot.assign(n, Mat3::Zero());
        log_scale.assign(n, Vec3::Zero());
        delta.assign(n, 0.0);
        color.assign(n, Vec3::Zero());
    }
    void add(const RawGrad& o) {
        for (size_t i = 0; i < mean.size(); ++i) {
            mean[i] += o.mean[i];
            rot[i] += o.rot[i];
            log_scale[i] += o.log_scale[i];
            delta[i] += o.delta[i];
            color[i] += o.color[i];
        }
    }
};

// dR/dq for a unit quaternion (w,x,y,z), contracted against an R-space
// adjoint.
Vec4 rotation_grad_to_quat(const Mat3& g, const Quat& q) {
    const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
    Mat3 dw, dx, dy, dz;
    dw << 0, -z, y, z, 0, -x, -y, x, 0;
    dx << 0, y, z, y, -2 * x, -w, z, w, -2 * x;
    dy << -2 * y, x, w, x, 0, z, -w, z, -2 * y;
    dz << -2 * z, -w, x, w, -2 * z, y, x, y, 0;
    return 2.0 * Vec4(g.cwiseProduct(dw).sum(), g.cwiseProduct(dx).sum(),
                      g.cwiseProduct(dy).sum(), g.cwiseProduct(dz).sum());
}

double frozen_weight(const std::vector<std::pair<int, double>>& frozen,
                     int id) {
    for (const auto& [fid, w] : frozen)
        if (fid == id) return w;
    return 0.0;
}

}  // namespace

LossResult evaluate_map_loss(const MapParams& params,
                             const PinholeCamera& camera,
                             const RigidPose& world_to_cam,
                             const Image& target, const MapLossConfig& cfg,
                             MapGradient* grad,
                             const PixelWeights* frozen_distortion_weights) {
    const int h = camera.height;
    const int w = camera.width;
    const int n_pix = h * w;
    if (target.height != h || target.width != w || target.channels != 3)
        throw Error("shape-mismatch", "target does not match camera size");

    const std::vector<GaussianPrimitive> map = params.to_primitives();
    const size_t n_gauss = map.size();

    std::vector<GaussData> gd(n_gauss);
    for (size_t i = 0; i < n_gauss; ++i) {
        GaussData& d = gd[i];
        d.rot = map[i].rotation.toRotationMatrix();
        d.inv_scale = map[i].scale.array().inverse().matrix();
        d.whiten = d.inv_scale.asDiagonal() * d.rot.transpose();
        d.d2 = d.inv_scale.array().square().matrix();
        d.inv_cov = d.rot * d.d2.asDiagonal() * d.rot.transpose();
        int k;
        map[i].scale.minCoeff(&k);
        d.shortest_axis = d.rot.col(k);
    }

    const Vec3 origin = camera_center(world_to_cam);
    const std::vector<double> deltas = map_opacities(map);

    // Phase 1: forward per pixel with full caches.
    std::vector<PixelCache> pixels(n_pix);
    parallel_for_blocks(n_pix, [&](int, int begin, int end) {
        for (int idx = begin; idx < end; ++idx) {
            const int y = idx / w;
            const int x = idx % w;
            const Ray ray = pixel_ray(camera, world_to_cam, x, y);
            PixelCache& pc = pixels[idx];
            pc.dir = ray.direction;
            RaySample sample = build_ray_sample(map, ray);
            pc.contribs.reserve(sample.contributions.size());
            double trans = 1.0;
            for (const RayContribution& rc : sample.contributions) {
                ContribCache c;
                c.id = rc.gaussian_id;
                const GaussData& g = gd[c.id];
                c.o_g = g.whiten * (origin - map[c.id].mean);
                c.r_g = g.whiten * ray.direction;
                c.a_coef = c.o_g.dot(c.r_g);
                c.b_coef = c.r_g.squaredNorm();
                c.c_coef = c.o_g.squaredNorm();
                c.d_star = -c.a_coef / c.b_coef;
                c.g_max = std::exp(
                    -0.5 * (c.c_coef - c.a_coef * c.a_coef / c.b_coef));
                (void)rc;
                const double raw_alpha = deltas[c.id] * c.g_max;
                c.alpha_clamped = raw_alpha > kMaxAlpha;
                c.alpha = c.alpha_clamped ? kMaxAlpha : raw_alpha;
                c.trans_before = trans;
                c.weight = c.alpha * trans;
                trans *= 1.0 - c.alpha;

                // Intersection-plane normal at the peak.
                c.v = origin + c.d_star * ray.direction - map[c.id].mean;
                if (c.v.norm() > 1e-9) {
                    c.m = -(g.inv_cov * c.v);
                    c.m_norm = c.m.norm();
                    Vec3 n = c.m / c.m_norm;
                    // Stationarity makes n.dir = 0 here; tolerance as in
                    // gaussian_normal_at so fp noise cannot flip the sign.
                    c.sign = n.dot(ray.direction) > 1e-6 ? -1.0 : 1.0;
                    c.normal = c.sign * n;
                    c.normal_fallback = false;
                } else {
                    Vec3 n = g.shortest_axis;
                    if (n.dot(ray.direction) > 1e-6) n = -n;
                    c.normal = n;
                    c.normal_fallback = true;
                }

                pc.color += c.weight * map[c.id].color;
                pc.weight_sum += c.weight;
                pc.depth_num += c.weight * c.d_star;
                pc.contribs.push_back(c);
            }
        }
    });

    // Assemble rendered maps.
    LossResult result;
    result.frame.color = Image(h, w, 3);
    result.frame.depth = Image(h, w, 1);
    result.frame.normal = Image(h, w, 3);
    result.frame.alpha = Image(h, w, 1);
    result.weights.resize(n_pix);
    for (int idx = 0; idx < n_pix; ++idx) {
        const int y = idx / w;
        const int x = idx % w;
        const PixelCache& pc = pixels[idx];
        result.frame.color.set_rgb(y, x, pc.color);
        result.frame.alpha.at(y, x) = pc.weight_sum;
        result.frame.depth.at(y, x) =
            pc.weight_sum < kMinRenderAlpha
                ? 0.0
                : pc.depth_num / std::max(pc.weight_sum, kDepthNormEps);
        Vec3 blended = Vec3::Zero();
        for (const auto& c : pc.contribs) blended += c.weight * c.normal;
        if (blended.norm() > 0.0)
            result.frame.normal.set_rgb(y, x, blended.normalized());
        auto& wlist = result.weights[idx];
        wlist.reserve(pc.contribs.size());
        for (const auto& c : pc.contribs) wlist.emplace_back(c.id, c.weight);
    }

    // Phase 2: image-space losses and their pixel-value adjoints.
    const double n_elems = static_cast<double>(result.frame.color.size());
    double l1 = 0.0;
    Image g_color_img(h, w, 3);  // d(total)/d(rendered color)
    for (size_t i = 0; i < result.frame.color.size(); ++i) {
        const double diff = result.frame.color.data[i] - target.data[i];
        l1 += std::abs(diff);
        g_color_img.data[i] = cfg.color_weight * (1.0 - cfg.lambda_dssim) *
                              (diff > 0 ? 1.0 : (diff < 0 ? -1.0 : 0.0)) /
                              n_elems;
    }
    l1 /= n_elems;

    double ssim_val = 1.0;
    if (cfg.lambda_dssim > 0.0) {
        Image g_ssim;
        ssim_val = grad ? ssim_with_grad(result.frame.color, target, &g_ssim)
                        : ssim(result.frame.color, target);
        if (grad && g_ssim.size() == g_color_img.size())
            for (size_t i = 0; i < g_color_img.size(); ++i)
                g_color_img.data[i] -= cfg.color_weight * cfg.lambda_dssim /
                                       2.0 * g_ssim.data[i];
    }
    result.loss.color = (1.0 - cfg.lambda_dssim) * l1 +
                        cfg.lambda_dssim * (1.0 - ssim_val) / 2.0;

    // Depth-normal consistency: per-pixel normals from the rendered depth.
    const Image n_cam = depth_to_normal(result.frame.depth, camera);
    const Mat3 r_cw = world_to_cam.rotation.toRotationMatrix();
    std::vector<Vec3> n_world(n_pix, Vec3::Zero());
    std::vector<bool> n_valid(n_pix, false);
    int valid_count = 0;
    for (int idx = 0; idx < n_pix; ++idx) {
        const Vec3 nc = n_cam.rgb(idx / w, idx % w);
        if (nc.norm() > 0.0) {
            n_world[idx] = r_cw.transpose() * nc;
            n_valid[idx] = true;
            ++valid_count;
        }
    }

    double l_normal = 0.0;
    if (valid_count > 0) {
        for (int idx = 0; idx < n_pix; ++idx) {
            if (!n_valid[idx]) continue;
            for (const auto& c : pixels[idx].contribs)
                l_normal += c.weight * (1.0 - c.normal.dot(n_world[idx]));
        }
        l_normal /= valid_count;
    }
    result.loss.normal = l_normal;

    // Depth distortion over peak depths (contributions are depth-sorted).
    double l_dist = 0.0;
    for (int idx = 0; idx < n_pix; ++idx) {
        const auto& cs = pixels[idx].contribs;
        double pref_w = 0.0, pref_wd = 0.0;
        for (const auto& c : cs) {
            const double wi =
                frozen_distortion_weights
                    ? frozen_weight((*frozen_distortion_weights)[idx], c.id)
                    : c.weight;
            l_dist += 2.0 * wi * (c.d_star * pref_w - pref_wd);
            pref_w += wi;
            pref_wd += wi * c.d_star;
        }
    }
    l_dist /= static_cast<double>(n_pix);
    result.loss.distortion = l_dist;

    result.loss = assemble_total(result.loss.color, result.loss.distortion,
                                 result.loss.normal, cfg);

    if (!grad) return result;

    // Backward through depth_to_normal into a per-pixel depth adjoint.
    std::vector<double> g_depth(n_pix, 0.0);
    if (valid_count > 0 && cfg.beta != 0.0) {
        for (int idx = 0; idx < n_pix; ++idx) {
            if (!n_valid[idx]) continue;
            Vec3 g_nw = Vec3::Zero();
            for (const auto& c : pixels[idx].contribs)
                g_nw -= c.weight * c.normal;
            g_nw *= cfg.beta / valid_count;
            const Vec3 g_nc = r_cw * g_nw;

            // Recompute the cross-product intermediates at this pixel.
            const int y = idx / w;
            const int x = idx % w;
            const double z0 = result.frame.depth.at(y, x);
            const double zr = result.frame.depth.at(y, x + 1);
            const double zd = result.frame.depth.at(y + 1, x);
            const Vec3 p0 = back_project(camera, x, y, z0);
            const Vec3 pr = back_project(camera, x + 1, y, zr);
            const Vec3 pd = back_project(camera, x, y + 1, zd);
            const Vec3 e1 = pr - p0;
            const Vec3 e2 = pd - p0;
            Vec3 cr = e1.cross(e2);
            const double len = cr.norm();
            const Vec3 nhat = cr / len;
            const double sgn = nhat.dot(p0) > 0.0 ? -1.0 : 1.0;
            const Vec3 g_cr = sgn / len * (g_nc - nhat * nhat.dot(g_nc));
            const Vec3 g_e1 = e2.cross(g_cr);
            const Vec3 g_e2 = g_cr.cross(e1);
            const Vec3 g_p0 = -g_e1 - g_e2;
            g_depth[idx] += g_p0.dot(Vec3((x - camera.cx) / camera.fx,
                                          (y - camera.cy) / camera.fy, 1.0));
            g_depth[idx + 1] += g_e1.dot(Vec3((x + 1 - camera.cx) / camera.fx,
                                              (y - camera.cy) / camera.fy, 1.0));
            g_depth[idx + w] += g_e2.dot(Vec3((x - camera.cx) / camera.fx,
                                              (y + 1 - camera.cy) / camera.fy, 1.0));
        }
    }

    // Phase 3: per-pixel backward into per-block parameter gradients.
    std::vector<RawGrad> block_grads(kFixedBlocks);
    for (auto& b : block_grads) b.resize_zero(n_gauss);

    const double beta_per_valid =
        valid_count > 0 ? cfg.beta / valid_count : 0.0;

    parallel_for_blocks(n_pix, [&](int block, int begin, int end) {
        RawGrad& acc = block_grads[block];
        std::vector<double> gw, gds;
        for (int idx = begin; idx < end; ++idx) {
            PixelCache& pc = pixels[idx];
            const size_t n = pc.contribs.size();
            if (n == 0) continue;
            gw.assign(n, 0.0);
            gds.assign(n, 0.0);

            const Vec3 g_col = g_color_img.rgb(idx / w, idx % w);
            const bool depth_live = pc.weight_sum >= kMinRenderAlpha;
            const double wt = std::max(pc.weight_sum, kDepthNormEps);
            const double g_d = g_depth[idx];
            const double g_u = depth_live ? g_d / wt : 0.0;
            const double g_wsum =
                depth_live ? -g_d * pc.depth_num / (wt * wt) : 0.0;

            // Color and depth blending.
            for (size_t i = 0; i < n; ++i) {
                const ContribCache& c = pc.contribs[i];
                gw[i] += g_col.dot(map[c.id].color);
                acc.color[c.id] += c.weight * g_col;
                gw[i] += g_u * c.d_star + g_wsum;
                gds[i] += g_u * c.weight;
            }

            // Depth distortion: gradients flow only through the depths.
            if (cfg.alpha != 0.0) {
                double pref = 0.0, suf = 0.0;
                for (size_t i = 0; i < n; ++i) {
                    const ContribCache& c = pc.contribs[i];
                    suf += frozen_distortion_weights
                               ? frozen_weight(
                                     (*frozen_distortion_weights)[idx], c.id)
                               : c.weight;
                }
                for (size_t i = 0; i < n; ++i) {
                    const ContribCache& c = pc.contribs[i];
                    const double wi =
                        frozen_distortion_weights
                            ? frozen_weight((*frozen_distortion_weights)[idx],
                                            c.id)
                            : c.weight;
                    suf -= wi;
                    gds[i] += cfg.alpha / n_pix * 2.0 * wi * (pref - suf);
                    pref += wi;
                }
            }

            // Normal consistency: weight path, normal path.
            if (n_valid[idx] && beta_per_valid != 0.0) {
                const Vec3& nw = n_world[idx];
                for (size_t i = 0; i < n; ++i) {
                    ContribCache& c = pc.contribs[i];
                    gw[i] += beta_per_valid * (1.0 - c.normal.dot(nw));
                    if (c.normal_fallback) continue;
                    const Vec3 g_n = -beta_per_valid * c.weight * nw;
                    const Vec3 mhat = c.m / c.m_norm;
                    const Vec3 g_m =
                        c.sign / c.m_norm * (g_n - mhat * mhat.dot(g_n));
                    const GaussData& g = gd[c.id];
                    const Vec3 g_v = -(g.inv_cov * g_m);
                    const Mat3 g_p = -g_m * c.v.transpose();
                    gds[i] += g_v.dot(pc.dir);
                    acc.mean[c.id] -= g_v;
                    acc.rot[c.id] +=
                        (g_p + g_p.transpose()) * g.rot * g.d2.asDiagonal();
                    const Vec3 diag = (g.rot.transpose() * g_p * g.rot).diagonal();
                    acc.log_scale[c.id] -=
                        2.0 * diag.cwiseProduct(g.d2);
                }
            }

            // Compositing chain: weights -> alphas -> (delta, g_max).
            double suffix = 0.0;
            for (size_t i = n; i-- > 0;) {
                const ContribCache& c = pc.contribs[i];
                double g_alpha = gw[i] * c.trans_before;
                g_alpha -= suffix / (1.0 - c.alpha);
                suffix += gw[i] * c.weight;

                double g_gmax = 0.0;
                if (!c.alpha_clamped) {
                    acc.delta[c.id] += g_alpha * c.g_max;
                    g_gmax = g_alpha * deltas[c.id];
                }

                // g_max = exp(-(C - A^2/B)/2), d* = -A/B.
                const double g_q = -0.5 * c.g_max * g_gmax;
                double g_a = g_q * (-2.0 * c.a_coef / c.b_coef);
                double g_b = g_q * (c.a_coef * c.a_coef) /
                             (c.b_coef * c.b_coef);
                const double g_c = g_q;
                g_a += gds[i] * (-1.0 / c.b_coef);
                g_b += gds[i] * (c.a_coef / (c.b_coef * c.b_coef));

                const Vec3 g_og = g_a * c.r_g + 2.0 * g_c * c.o_g;
                const Vec3 g_rg = g_a * c.o_g + 2.0 * g_b * c.r_g;

                const GaussData& g = gd[c.id];
                const Vec3 delta_vec = origin - map[c.id].mean;
                const Mat3 g_m_whiten = g_og * delta_vec.transpose() +
                                        g_rg * pc.dir.transpose();
                acc.mean[c.id] -= g.whiten.transpose() * g_og;
                acc.rot[c.id] +=
                    g_m_whiten.transpose() * g.inv_scale.asDiagonal();
                acc.log_scale[c.id] -=
                    (g_m_whiten.cwiseProduct(g.whiten)).rowwise().sum();
            }
        }
    });

    // Deterministic merge and reparameterization.
    RawGrad total = std::move(block_grads[0]);
    for (int b = 1; b < kFixedBlocks; ++b) total.add(block_grads[b]);

    grad->resize_zero(n_gauss);
    for (size_t i = 0; i < n_gauss; ++i) {
        grad->mean[i] = total.mean[i];
        grad->log_scale[i] = total.log_scale[i];
        grad->color[i] = total.color[i];
        const double delta = deltas[i];
        grad->logit_opacity[i] = total.delta[i] * delta * (1.0 - delta);

        const Quat q = map[i].rotation;
        const Vec4 g_unit = rotation_grad_to_quat(total.rot[i], q);
        const Vec4 qv(q.w(), q.x(), q.y(), q.z());
        const double raw_norm = params.quat[i].norm();
        grad->quat[i] = (g_unit - qv * qv.dot(g_unit)) / raw_norm;
    }
    return result;
}

}  // namespace fgo
