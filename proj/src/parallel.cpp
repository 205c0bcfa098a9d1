#include "fgo/parallel.hpp"

#include <atomic>

namespace fgo {

namespace {
std::atomic<int> g_threads{0};  // 0 = auto
}

int parallel_threads() {
    const int n = g_threads.load();
    if (n > 0) return n;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

void set_parallel_threads(int n) { g_threads.store(n); }

void parallel_for_blocks(
    int n, const std::function<void(int block, int begin, int end)>& fn) {
    if (n <= 0) return;
    const int blocks = std::min(kFixedBlocks, n);
    const int per = (n + blocks - 1) / blocks;
    const int workers = std::min(parallel_threads(), blocks);

    if (workers <= 1) {
        for (int b = 0; b < blocks; ++b)
            fn(b, b * per, std::min(n, (b + 1) * per));
        return;
    }

    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&]() {
            for (int b = next.fetch_add(1); b < blocks; b = next.fetch_add(1))
                fn(b, b * per, std::min(n, (b + 1) * per));
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace fgo
