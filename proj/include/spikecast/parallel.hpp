#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace spikecast {

// Applies fn to every index in [0, n) with at most `max_in_flight` calls
// running at once. Results land at their index, so output order never
// depends on scheduling. The first exception is rethrown after all workers
// stop.
template <typename Fn>
auto bounded_parallel_map(std::size_t n, std::size_t max_in_flight, Fn&& fn)
    -> std::vector<decltype(fn(std::size_t{}))> {
    using R = decltype(fn(std::size_t{}));
    std::vector<R> results(n);
    const std::size_t workers = std::min(n, std::max<std::size_t>(1, max_in_flight));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) results[i] = fn(i);
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        results[i] = fn(i);
                    } catch (...) {
                        std::lock_guard lock(error_mu);
                        if (!error) error = std::current_exception();
                        next = n;
                    }
                }
            });
    }
    if (error) std::rethrow_exception(error);
    return results;
}

}  // namespace spikecast
