#include "fgo/ssim.hpp"

#include "fgo/error.hpp"

#include <array>
#include <cmath>

namespace fgo {

namespace {

constexpr int kWin = 11;
constexpr int kHalf = kWin / 2;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

const std::array<double, kWin>& window() {
    static const std::array<double, kWin> w = [] {
        std::array<double, kWin> g{};
        double sum = 0.0;
        for (int i = 0; i < kWin; ++i) {
            const double d = i - kHalf;
            g[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
            sum += g[i];
        }
        for (double& v : g) v /= sum;
        return g;
    }();
    return w;
}

// Valid separable convolution with the Gaussian window.
// out(y, x) = sum_{i,j} w_i w_j in(y+i, x+j); out is (H-10) x (W-10).
MatX valid_conv(const MatX& in) {
    const auto& w = window();
    const int h = static_cast<int>(in.rows());
    const int wd = static_cast<int>(in.cols());
    MatX rows(h, wd - 2 * kHalf);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < wd - 2 * kHalf; ++x) {
            double s = 0.0;
            for (int j = 0; j < kWin; ++j) s += w[j] * in(y, x + j);
            rows(y, x) = s;
        }
    MatX out(h - 2 * kHalf, wd - 2 * kHalf);
    for (int y = 0; y < h - 2 * kHalf; ++y)
        for (int x = 0; x < wd - 2 * kHalf; ++x) {
            double s = 0.0;
            for (int i = 0; i < kWin; ++i) s += w[i] * rows(y + i, x);
            out(y, x) = s;
        }
    return out;
}

// Adjoint of valid_conv: scatter each output adjoint back over its window.
MatX spread(const MatX& gout, int h, int wd) {
    const auto& w = window();
    MatX cols = MatX::Zero(h, gout.cols());
    for (int y = 0; y < gout.rows(); ++y)
        for (int i = 0; i < kWin; ++i)
            cols.row(y + i) += w[i] * gout.row(y);
    MatX gin = MatX::Zero(h, wd);
    for (int x = 0; x < gout.cols(); ++x)
        for (int j = 0; j < kWin; ++j)
            gin.col(x + j) += w[j] * cols.col(x);
    return gin;
}

MatX channel(const Image& img, int c) {
    MatX m(img.height, img.width);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) m(y, x) = img.at(y, x, c);
    return m;
}

double ssim_impl(const Image& a, const Image& b, Image* grad_a) {
    if (!a.same_shape(b)) throw Error("shape-mismatch", "ssim inputs differ");
    if (grad_a) *grad_a = Image(a.height, a.width, a.channels);
    if (a.height < kWin || a.width < kWin) return 1.0;

    const int oh = a.height - 2 * kHalf;
    const int ow = a.width - 2 * kHalf;
    const double count = static_cast<double>(oh) * ow * a.channels;

    double total = 0.0;
    for (int c = 0; c < a.channels; ++c) {
        const MatX x = channel(a, c);
        const MatX y = channel(b, c);
        const MatX mu1 = valid_conv(x);
        const MatX mu2 = valid_conv(y);
        const MatX xx = valid_conv(x.cwiseProduct(x));
        const MatX yy = valid_conv(y.cwiseProduct(y));
        const MatX xy = valid_conv(x.cwiseProduct(y));

        const MatX s1 = xx - mu1.cwiseProduct(mu1);
        const MatX s2 = yy - mu2.cwiseProduct(mu2);
        const MatX s12 = xy - mu1.cwiseProduct(mu2);

        const MatX a1 = 2.0 * mu1.cwiseProduct(mu2).array() + kC1;
        const MatX a2 = 2.0 * s12.array() + kC2;
        const MatX b1 = (mu1.array().square() + mu2.array().square() + kC1).matrix();
        const MatX b2 = (s1 + s2).array() + kC2;

        const MatX denom = b1.cwiseProduct(b2);
        const MatX s = a1.cwiseProduct(a2).cwiseQuotient(denom);
        total += s.sum();

        if (!grad_a) continue;

        // Pointwise partials of mean(S), then adjoints of the convolutions.
        const MatX ga1 = a2.cwiseQuotient(denom) / count;
        const MatX ga2 = a1.cwiseQuotient(denom) / count;
        const MatX gb1 = -s.cwiseQuotient(b1) / count;
        const MatX gb2 = -s.cwiseQuotient(b2) / count;

        const MatX gmu1 = 2.0 * (ga1.cwiseProduct(mu2) + gb1.cwiseProduct(mu1) -
                                 ga2.cwiseProduct(mu2) - gb2.cwiseProduct(mu1));
        const MatX gxx = gb2;
        const MatX gxy = 2.0 * ga2;

        const MatX gx = spread(gmu1, a.height, a.width) +
                        2.0 * x.cwiseProduct(spread(gxx, a.height, a.width)) +
                        y.cwiseProduct(spread(gxy, a.height, a.width));
        for (int yy2 = 0; yy2 < a.height; ++yy2)
            for (int xx2 = 0; xx2 < a.width; ++xx2)
                grad_a->at(yy2, xx2, c) = gx(yy2, xx2);
    }
    return total / count;
}

}  // namespace

double ssim(const Image& a, const Image& b) { return ssim_impl(a, b, nullptr); }

double ssim_with_grad(const Image& a, const Image& b, Image* grad_a) {
    return ssim_impl(a, b, grad_a);
}

}  // namespace fgo
