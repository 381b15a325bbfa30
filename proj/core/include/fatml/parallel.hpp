#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fatml {

inline size_t effective_jobs(size_t jobs) {
    if (jobs == 0) {
        unsigned hc = std::thread::hardware_concurrency();
        return hc == 0 ? 1 : hc;
    }
    return jobs;
}

/// Run body(i) for i in [0, n) across `jobs` threads. Work is handed out via
/// an atomic counter, so bodies must write only to slots owned by their index;
/// with that discipline results are identical for any worker count. The first
/// exception thrown by any body is rethrown on the calling thread.
template <typename Body>
void parallel_for(size_t n, size_t jobs, Body&& body) {
    jobs = effective_jobs(jobs);
    if (n == 0) return;
    if (jobs <= 1 || n == 1) {
        for (size_t i = 0; i < n; ++i) body(i);
        return;
    }
    if (jobs > n) jobs = n;

    std::atomic<size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&]() {
        for (;;) {
            size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n || failed.load(std::memory_order_relaxed)) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace fatml
