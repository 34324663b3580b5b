#pragma once
// Deterministic parallel map over index ranges. Each index writes only its own
// outputs, so results do not depend on the thread count. FAIRSCOPE_THREADS
// caps the pool.

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace fairscope {

inline unsigned max_threads() {
    static const unsigned cached = [] {
        unsigned hw = std::thread::hardware_concurrency();
        if (hw == 0) hw = 1;
        if (const char* env = std::getenv("FAIRSCOPE_THREADS")) {
            const long v = std::strtol(env, nullptr, 10);
            if (v >= 1) hw = std::min<unsigned>(hw, static_cast<unsigned>(v));
        }
        return hw;
    }();
    return cached;
}

template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const unsigned workers = std::min<std::size_t>(max_threads(), n);
    if (workers <= 1 || n < 256) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace fairscope
