#pragma once

// Index-parallel loops over independent work items. Results are written by
// index, so output never depends on the thread count.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dynlab {

/// Worker count: the value given to set_thread_count, else the
/// DYNLAB_THREADS environment variable, else the hardware concurrency.
int thread_count();
/// 0 restores the default lookup.
void set_thread_count(int threads);

/// Calls body(i) for i in [0, n). An exception from any item is rethrown
/// after all workers stop; the lowest failing index wins.
template <class Body>
void parallel_for(std::size_t n, const Body& body) {
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::mutex guard;
    std::exception_ptr error;
    std::size_t error_index = n;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(guard);
                    if (i < error_index) {
                        error_index = i;
                        error = std::current_exception();
                    }
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace dynlab
