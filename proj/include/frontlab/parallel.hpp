#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace frontlab {

// Worker cap: explicit argument > FRONTLAB_THREADS env > hardware.
inline std::size_t resolve_thread_cap(std::size_t requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("FRONTLAB_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

// Runs fn(block_index, begin, end) over contiguous blocks. Results must be
// combined per block afterwards so the reduction order (and therefore the
// floating-point result) is independent of the worker count.
template <typename Fn>
void parallel_blocks(std::size_t count, std::size_t n_blocks, std::size_t n_threads, Fn&& fn) {
    n_blocks = std::max<std::size_t>(1, std::min(n_blocks, count == 0 ? 1 : count));
    const std::size_t per = (count + n_blocks - 1) / std::max<std::size_t>(n_blocks, 1);
    n_threads = std::max<std::size_t>(1, std::min(n_threads, n_blocks));
    if (n_threads == 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) {
            const std::size_t lo = b * per;
            if (lo >= count) break;
            fn(b, lo, std::min(count, lo + per));
        }
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    for (std::size_t w = 0; w < n_threads; ++w) {
        workers.emplace_back([&, w] {
            for (std::size_t b = w; b < n_blocks; b += n_threads) {
                const std::size_t lo = b * per;
                if (lo >= count) continue;
                fn(b, lo, std::min(count, lo + per));
            }
        });
    }
    for (auto& th : workers) th.join();
}

} // namespace frontlab
