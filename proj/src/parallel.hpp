#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace lcnes::util {

// Runs fn(i) for i in [begin, end). Work items must be independent; results
// keyed by i stay schedule-independent regardless of the worker count.
inline void parallel_for(std::uint64_t begin, std::uint64_t end, int workers,
                         const std::function<void(std::uint64_t)>& fn) {
    if (end <= begin) return;
    if (workers <= 0) workers = int(std::thread::hardware_concurrency());
    if (workers <= 1 || end - begin == 1) {
        for (std::uint64_t i = begin; i < end; ++i) fn(i);
        return;
    }
    std::atomic<std::uint64_t> next(begin);
    std::atomic<bool> failed(false);
    std::exception_ptr error;
    std::mutex error_mu;
    auto worker = [&] {
        for (;;) {
            const std::uint64_t i = next.fetch_add(1);
            if (i >= end || failed.load(std::memory_order_relaxed)) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!error) error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int count = int(std::min<std::uint64_t>(std::uint64_t(workers), end - begin));
    pool.reserve(std::size_t(count));
    for (int w = 0; w < count; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace lcnes::util
