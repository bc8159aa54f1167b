#include "vpflow/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>

namespace vpflow {

int worker_count() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
    n = std::min(n, 8);
    if (const char* env = std::getenv("VPFLOW_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) n = std::min(n, cap);
    }
    return n;
}

void parallel_blocks(std::size_t n_blocks, const std::function<void(std::size_t)>& fn) {
    const int workers = std::min<std::size_t>(worker_count(), n_blocks);
    if (workers <= 1 || n_blocks <= 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) fn(b);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t b = next.fetch_add(1);
                if (b >= n_blocks) return;
                fn(b);
            }
        });
    }
    for (auto& th : pool) th.join();
}

void parallel_chunks(std::size_t n, std::size_t chunk,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    const std::size_t blocks = n_chunks(n, chunk);
    parallel_blocks(blocks, [&](std::size_t b) {
        const std::size_t lo = b * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        fn(lo, hi, b);
    });
}

}  // namespace vpflow
