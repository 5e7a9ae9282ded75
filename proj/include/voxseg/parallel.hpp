// Minimal data-parallel helpers. Reductions are chunked into fixed-size blocks
// combined in block order, so results are bitwise identical for any thread
// count (including 1).
#pragma once

#include <cstdint>
#include <thread>
#include <vector>

#include "voxseg/core.hpp"

namespace voxseg {

inline int normalize_threads(int threads) {
    if (threads < 1) fail("args", "threads must be >= 1");
    return threads;
}

/// Runs body(begin, end) over [0, n) split into contiguous ranges.
template <class F>
void parallel_for(std::int64_t n, int threads, F&& body) {
    threads = normalize_threads(threads);
    if (n <= 0) return;
    if (threads == 1 || n < 2 * threads) {
        body(std::int64_t(0), n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads) - 1);
    const std::int64_t chunk = (n + threads - 1) / threads;
    for (int t = 1; t < threads; ++t) {
        const std::int64_t b = t * chunk;
        const std::int64_t e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&body, b, e] { body(b, e); });
    }
    body(std::int64_t(0), std::min(n, chunk));
    for (auto& th : pool) th.join();
}

// Block size for deterministic reductions. Fixed so that the grouping of
// floating-point additions does not depend on the thread count.
inline constexpr std::int64_t kReduceBlock = 4096;

/// Deterministic reduction: block(begin, end) -> T computed per fixed block
/// (possibly in parallel), partials combined serially in block order with
/// T::operator+=.
template <class T, class BlockFn>
T block_reduce(std::int64_t n, int threads, BlockFn&& block) {
    if (n <= 0) return T{};
    const std::int64_t nblocks = (n + kReduceBlock - 1) / kReduceBlock;
    std::vector<T> partials(static_cast<std::size_t>(nblocks));
    parallel_for(nblocks, threads, [&](std::int64_t b0, std::int64_t b1) {
        for (std::int64_t b = b0; b < b1; ++b) {
            const std::int64_t begin = b * kReduceBlock;
            const std::int64_t end = std::min(n, begin + kReduceBlock);
            partials[static_cast<std::size_t>(b)] = block(begin, end);
        }
    });
    T total{};
    for (const T& p : partials) total += p;
    return total;
}

} // namespace voxseg
