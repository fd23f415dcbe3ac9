#ifndef DWALLSIM_PARALLEL_HPP
#define DWALLSIM_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace dwallsim {

/// Worker count from DWALLSIM_THREADS (default 1, clamped to [1, hardware threads]).
inline unsigned thread_budget() {
    static const unsigned budget = [] {
        unsigned n = 1;
        if (const char* env = std::getenv("DWALLSIM_THREADS")) {
            try {
                n = static_cast<unsigned>(std::max(1L, std::stol(env)));
            } catch (...) {
                n = 1;
            }
        }
        const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
        return std::min(n, hw);
    }();
    return budget;
}

/// Runs body(lo, hi) over [0, n) in contiguous chunks. Each index is written by exactly one
/// worker, so results do not depend on the thread count.
template <class Body>
void parallel_for(std::size_t n, Body&& body, std::size_t min_chunk = 4096) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_budget(), n / min_chunk));
    if (workers <= 1) {
        body(std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 1; w < workers; ++w) {
        const std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
        if (lo < hi) pool.emplace_back([&body, lo, hi] { body(lo, hi); });
    }
    body(std::size_t{0}, std::min(n, chunk));
    for (auto& t : pool) t.join();
}

}  // namespace dwallsim

#endif  // DWALLSIM_PARALLEL_HPP
