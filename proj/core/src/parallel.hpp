#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace diffpos::detail {

inline unsigned worker_count(std::size_t work_items) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::size_t>(hw, std::max<std::size_t>(work_items, 1)));
}

// Splits [0, n) into contiguous chunks, one per worker. fn(worker, begin, end).
// The first exception thrown by any worker is rethrown after all join.
inline void parallel_chunks(std::size_t n, const std::function<void(unsigned, std::size_t, std::size_t)>& fn) {
    const unsigned workers = worker_count(n);
    if (workers <= 1) {
        fn(0, 0, n);
        return;
    }
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t begin = std::min(n, w * chunk);
        const std::size_t end = std::min(n, begin + chunk);
        threads.emplace_back([&, w, begin, end] {
            try {
                fn(w, begin, end);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace diffpos::detail
