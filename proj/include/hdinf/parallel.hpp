#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace hdinf {

// Runs fn(0..count-1) on up to `workers` threads. Callers index into
// preallocated storage, so results are identical for any worker count.
inline void parallel_for(std::size_t count, unsigned workers,
                         const std::function<void(std::size_t)>& fn) {
    workers = std::max(1u, workers);
    if (workers == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    const std::size_t launch = std::min<std::size_t>(workers, count);
    pool.reserve(launch);
    for (std::size_t w = 0; w < launch; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
}

} // namespace hdinf
