#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rwlt {

/// Runs task(i) for i in [0, n_tasks) on up to `workers` threads. Tasks write
/// into their own slots; callers reduce in index order, so results never
/// depend on the worker count. The first exception is rethrown.
template <class Task>
void parallel_for(std::size_t n_tasks, unsigned workers, Task&& task) {
    if (workers <= 1 || n_tasks <= 1) {
        for (std::size_t i = 0; i < n_tasks; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n_tasks) return;
            try {
                task(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(n_tasks);
                return;
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        const auto n = std::min<std::size_t>(workers, n_tasks);
        for (std::size_t w = 0; w < n; ++w) pool.emplace_back(body);
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace rwlt
