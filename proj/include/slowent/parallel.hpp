#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace slowent {

// Splits [0, n) into contiguous chunks, one per worker; fn(worker, begin, end).
// Callers fold per-worker results in worker order, so output does not depend on timing.
template <class Fn>
void run_chunks(std::size_t n, unsigned threads, Fn fn) {
    threads = std::max(1u, threads);
    if (n < threads) threads = static_cast<unsigned>(std::max<std::size_t>(n, 1));
    if (threads == 1) {
        fn(0u, std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) {
        std::size_t b = n * i / threads, e = n * (i + 1) / threads;
        pool.emplace_back([=] { fn(i, b, e); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace slowent
