#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace stereo_bp {

/// Splits [0, count) into contiguous chunks, one per worker, and calls fn(begin, end) on each.
/// Runs inline when `threads` <= 1. Callers must write disjoint outputs per index.
template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
    threads = std::clamp(threads, 1, std::max(count, 1));
    if (threads == 1) {
        fn(0, count);
        return;
    }
    std::vector<std::jthread> workers;
    workers.reserve(threads - 1);
    const int chunk = (count + threads - 1) / threads;
    for (int t = 1; t < threads; ++t) {
        const int begin = std::min(count, t * chunk);
        const int end = std::min(count, begin + chunk);
        if (begin < end) workers.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    fn(0, std::min(count, chunk));
}

/// Resolves a requested worker count; values < 1 mean "use the hardware concurrency".
inline int resolve_threads(int requested) {
    if (requested >= 1) return requested;
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

}  // namespace stereo_bp
