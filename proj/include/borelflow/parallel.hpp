// SPDX-License-Identifier: Apache-2.0

#ifndef BORELFLOW_PARALLEL_HPP
#define BORELFLOW_PARALLEL_HPP

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace borelflow {

/// Worker count: explicit argument > BOREL_FLOW_WORKERS env > 1.
inline int resolve_workers(int requested = 0) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("BOREL_FLOW_WORKERS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    return 1;
}

/// Chunked parallel loop over [begin, end). Writes of distinct indices must not
/// alias; results are independent of the worker count.
inline void parallel_for(std::size_t begin, std::size_t end,
                         const std::function<void(std::size_t)>& body,
                         int workers = 1) {
    const std::size_t n = end > begin ? end - begin : 0;
    if (n == 0) return;
    if (workers <= 1 || n < 64) {
        for (std::size_t i = begin; i < end; ++i) body(i);
        return;
    }
    const std::size_t nw = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    std::vector<std::thread> pool;
    pool.reserve(nw);
    const std::size_t chunk = (n + nw - 1) / nw;
    for (std::size_t w = 0; w < nw; ++w) {
        const std::size_t lo = begin + w * chunk;
        const std::size_t hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&body, lo, hi] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace borelflow

#endif
