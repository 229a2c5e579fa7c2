#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tsns
{
//! Worker count: $TSNS_THREADS if set, else the hardware concurrency
inline unsigned worker_count()
{
    if (char const* env = std::getenv("TSNS_THREADS"))
    {
        int n = std::atoi(env);
        if (n > 0)
            return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/*!
 * Run fn(i) for i in [0, n) on a pool of workers.
 *
 * Work items are claimed dynamically, so fn must only write to slot i of
 * caller-owned storage; any reduction over the slots then happens in index
 * order and is independent of scheduling.
 */
template<class F>
void parallel_for(std::size_t n, F&& fn)
{
    unsigned workers = std::min<std::size_t>(worker_count(), n);
    if (workers <= 1)
    {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&] {
        for (std::size_t i = next++; i < n; i = next++)
        {
            try
            {
                fn(i);
            }
            catch (...)
            {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                next = n;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w)
        pool.emplace_back(body);
    body();
    for (auto& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
}
}  // namespace tsns
