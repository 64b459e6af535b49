#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace exitlab {

/// Global cap on worker threads (0 = hardware concurrency).
void set_max_threads(unsigned n) noexcept;
unsigned max_threads() noexcept;

/// Runs job(i) for i in [0,n) on up to max_threads() workers and returns the
/// results in index order. The first exception thrown by a job is rethrown.
template <class Job>
auto parallel_map(std::size_t n, Job job) -> std::vector<decltype(job(std::size_t{}))> {
    using R = decltype(job(std::size_t{}));
    std::vector<R> out(n);
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(max_threads(), std::max<std::size_t>(n, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = job(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    out[i] = job(i);
                } catch (...) {
                    std::lock_guard lock(err_mutex);
                    if (!err) err = std::current_exception();
                    next = n;
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
    return out;
}

}  // namespace exitlab
