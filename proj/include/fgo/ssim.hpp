#pragma once

#include "fgo/types.hpp"

namespace fgo {

/// SSIM between same-shape images in [0,1]: 11x11 Gaussian window with
/// sigma 1.5, K1 = 0.01, K2 = 0.03, averaged over channels and over output
/// pixels where the full window fits. Returns 1 when the window does not fit.
double ssim(const Image& a, const Image& b);

/// SSIM value plus the gradient of the mean SSIM with respect to image `a`.
/// `grad_a` is resized to a's shape and overwritten.
double ssim_with_grad(const Image& a, const Image& b, Image* grad_a);

}  // namespace fgo
