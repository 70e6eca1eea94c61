#pragma once

// ===== Deterministic work splitting =====
//
// Outer observation paths are independent, so solvers fan the index range out
// over a fixed number of threads in contiguous chunks.  Workers only write to
// disjoint slices and every reduction runs sequentially in index order, which
// keeps results byte-identical for any thread count.

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace mfsmp {

/// Process-wide worker count, set once by the caller (command line or tests).
inline std::atomic<int>& thread_count() {
    static std::atomic<int> n{1};
    return n;
}

inline void set_thread_count(int n) { thread_count().store(n < 1 ? 1 : n); }

/// Apply body(j) for j in [0, n).  Writes inside body must target slices
/// disjoint across j.
inline void parallel_over(std::size_t n, const std::function<void(std::size_t)>& body) {
    const int workers = thread_count().load();
    if (workers <= 1 || n <= 1) {
        for (std::size_t j = 0; j < n; ++j) body(j);
        return;
    }
    const std::size_t w = static_cast<std::size_t>(workers) < n
                              ? static_cast<std::size_t>(workers)
                              : n;
    std::vector<std::thread> pool;
    pool.reserve(w);
    std::exception_ptr first_error;
    std::atomic<bool> failed{false};
    std::mutex guard;
    const std::size_t chunk = (n + w - 1) / w;
    for (std::size_t t = 0; t < w; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = begin + chunk < n ? begin + chunk : n;
        if (begin >= end) break;
        pool.emplace_back([&, begin, end] {
            try {
                for (std::size_t j = begin; j < end; ++j) body(j);
            } catch (...) {
                if (!failed.exchange(true)) {
                    std::lock_guard<std::mutex> lock(guard);
                    first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace mfsmp
