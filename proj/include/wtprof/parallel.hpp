#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <future>
#include <vector>

namespace wtprof {

/// Runs fn(0) ... fn(n-1) on up to `workers` threads. Each task must write only
/// to its own output slot. If tasks throw, the exception of the lowest index is
/// rethrown once all tasks have finished, so failures are reported
/// deterministically.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
    std::vector<std::exception_ptr> errors(n);
    auto run = [&](std::size_t i) {
        try {
            fn(i);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) run(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::future<void>> pool;
        for (std::size_t w = 0; w < std::min(workers, n); ++w) {
            pool.push_back(std::async(std::launch::async, [&] {
                for (std::size_t i = next++; i < n; i = next++) run(i);
            }));
        }
        for (auto& f : pool) f.get();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace wtprof
