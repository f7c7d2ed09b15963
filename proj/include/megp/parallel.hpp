#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace megp {

/// Calls fn(i) for every i in [0, n) on up to `threads` workers.
/// Each index runs exactly once; callers write results by index so the
/// outcome never depends on the worker count. The first exception thrown
/// by any call is rethrown after all workers join.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn)
{
    const auto workers = static_cast<std::size_t>(std::max(1U, threads));
    if (workers == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }

    std::atomic<std::size_t> next { 0 };
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (;;) {
            const auto i = next.fetch_add(1);
            if (i >= n) {
                return;
            }
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                next.store(n);
            }
        }
    };

    std::vector<std::jthread> pool;
    pool.reserve(std::min(workers, n) - 1);
    for (std::size_t t = 1; t < std::min(workers, n); ++t) {
        pool.emplace_back(work);
    }
    work();
    pool.clear();
    if (error) {
        std::rethrow_exception(error);
    }
}

} // namespace megp
