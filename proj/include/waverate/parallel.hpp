#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace waverate {

// Worker count: explicit argument, else WAVERATE_THREADS, else hardware.
inline int default_thread_count() {
    if (const char* env = std::getenv("WAVERATE_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return v;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

// Strided static schedule over [0, count). Work items must be independent;
// results keyed by index, so output is identical for every worker count.
inline void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    if (threads <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    int workers = std::min(threads, count);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&, w]() {
            for (int i = w; i < count; i += workers) body(i);
        });
    for (auto& t : pool) t.join();
}

} // namespace waverate
