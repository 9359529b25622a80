#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <stop_token>
#include <thread>
#include <vector>

#include "lightguide/error.hpp"

namespace lightguide::detail {

inline std::size_t worker_count(std::size_t tasks, std::size_t requested = 0) {
    std::size_t n = requested ? requested : std::max<std::size_t>(1, std::thread::hardware_concurrency());
    return std::max<std::size_t>(1, std::min(n, tasks));
}

/// Calls fn(i) for i in [0, count) on a few threads. Chunks are contiguous, so
/// results written per index are independent of the schedule. Throws
/// CancelledError if `stop` fires; rethrows the first task exception.
template <typename Fn>
void parallel_for(std::size_t count, std::stop_token stop, Fn&& fn, std::size_t threads = 0) {
    if (count == 0) return;
    const std::size_t workers = worker_count(count, threads);
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) {
            if ((i & 63) == 0 && stop.stop_requested()) throw CancelledError();
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    constexpr std::size_t chunk = 16;
    auto work = [&] {
        try {
            for (;;) {
                if (failed.load() || stop.stop_requested()) return;
                const std::size_t begin = next.fetch_add(chunk);
                if (begin >= count) return;
                const std::size_t end = std::min(count, begin + chunk);
                for (std::size_t i = begin; i < end; ++i) fn(i);
            }
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            failed = true;
        }
    };
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
        work();
    }
    if (error) std::rethrow_exception(error);
    if (stop.stop_requested()) throw CancelledError();
}

}  // namespace lightguide::detail
