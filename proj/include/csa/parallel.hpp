#pragma once

#include <cstdint>
#include <thread>
#include <vector>

namespace csa {

inline int resolve_workers(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Splits [0, total) into one contiguous chunk per worker and runs
// fn(worker_index, begin, end) on each. Results must be merged by the caller
// in worker order; chunk boundaries depend only on (total, workers).
template <typename Fn>
void run_chunked(std::uint64_t total, int workers, Fn&& fn) {
    workers = resolve_workers(workers);
    if (workers == 1 || total <= 1) {
        fn(0, std::uint64_t{0}, total);
        return;
    }
    const auto w = static_cast<std::uint64_t>(workers);
    std::vector<std::thread> threads;
    threads.reserve(w);
    for (std::uint64_t i = 0; i < w; ++i) {
        const std::uint64_t begin = total * i / w;
        const std::uint64_t end = total * (i + 1) / w;
        threads.emplace_back([&fn, i, begin, end] { fn(static_cast<int>(i), begin, end); });
    }
    for (auto& t : threads) t.join();
}

}  // namespace csa
