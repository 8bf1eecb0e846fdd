#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dmfp {

/// Worker cap: DMFP_WORKERS when set (clamped to [1, 256]), otherwise the
/// hardware concurrency.
int worker_count();

/// Runs f(i) for i in [0, n) across `workers` threads pulling indices from a
/// shared counter. Work items must write disjoint state (or be merged in a
/// fixed order afterwards) so results never depend on the worker count.
/// The first exception thrown by any worker is rethrown after joining.
template <typename Fn>
void parallel_for_index(std::int64_t n, int workers, Fn&& f) {
    if (n <= 0) return;
    if (workers <= 1 || n == 1) {
        for (std::int64_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto body = [&] {
        for (;;) {
            const std::int64_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n || failed.load(std::memory_order_relaxed)) break;
            try {
                f(i);
            } catch (...) {
                std::scoped_lock lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
                break;
            }
        }
    };
    const int spawn = static_cast<int>(std::min<std::int64_t>(workers, n));
    std::vector<std::thread> threads;
    threads.reserve(spawn);
    for (int t = 0; t < spawn; ++t) threads.emplace_back(body);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace dmfp
