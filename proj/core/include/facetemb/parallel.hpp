#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace facetemb {

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Work is split into
/// contiguous index ranges so results written by index stay deterministic.
template <class Fn>
void parallel_for_indexed(std::size_t n, int threads, Fn&& fn) {
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
        std::size_t lo = n * w / n_workers;
        std::size_t hi = n * (w + 1) / n_workers;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (std::thread& t : pool) t.join();
}

}  // namespace facetemb
