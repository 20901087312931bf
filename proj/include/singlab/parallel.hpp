#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace singlab {

/// Runs fn(0..n-1) on up to `workers` threads. Work items must be independent;
/// results are written by index, so the outcome is identical for any worker
/// count. The lowest-index exception is rethrown after all threads join.
template <class Fn>
void parallel_map(std::size_t n, int workers, Fn&& fn) {
    if (n == 0) return;
    const int nw = std::max(1, std::min<int>(workers, int(n)));
    if (nw == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    pool.reserve(std::size_t(nw));
    for (int w = 0; w < nw; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) break;
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (std::size_t i = 0; i < n; ++i) {
        if (errors[i]) std::rethrow_exception(errors[i]);
    }
}

/// Default worker count: SINGLAB_WORKERS env var, else hardware concurrency.
int default_workers();

}  // namespace singlab
