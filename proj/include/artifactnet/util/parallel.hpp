#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace artifactnet {

// Runs fn(0..n_jobs-1) on up to `workers` threads. Callers own output
// ordering: results must be written to preallocated, index-keyed slots.
inline void run_parallel(std::size_t n_jobs, int workers, const std::function<void(std::size_t)>& fn) {
    if (workers <= 1 || n_jobs <= 1) {
        for (std::size_t i = 0; i < n_jobs; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    const int n_threads = static_cast<int>(std::min<std::size_t>(workers, n_jobs));
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n_jobs) break;
                fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

inline int default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace artifactnet
