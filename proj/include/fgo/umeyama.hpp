#pragma once

#include "fgo/pose.hpp"
#include "fgo/types.hpp"

#include <vector>

namespace fgo {

/// Least-squares similarity (rigid when with_scale is false) minimizing
/// sum |target_i - T(source_i)|^2. Requires >= 3 non-collinear pairs;
/// throws Error("degenerate-configuration") otherwise.
SimilarityTransform umeyama_align(const std::vector<Vec3>& source,
                                  const std::vector<Vec3>& target,
                                  bool with_scale);

}  // namespace fgo
