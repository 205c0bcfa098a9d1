#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace fgo {

/// Number of worker threads used by block-parallel loops. The partition into
/// blocks is fixed independently of this value, so results are bit-identical
/// for any setting.
int parallel_threads();
void set_parallel_threads(int n);

/// Runs fn(block, begin, end) over a fixed partition of [0, n) into
/// kFixedBlocks contiguous blocks. Blocks may run on any thread; callers that
/// reduce must merge per-block buffers in block order.
constexpr int kFixedBlocks = 16;

void parallel_for_blocks(
    int n, const std::function<void(int block, int begin, int end)>& fn);

}  // namespace fgo
