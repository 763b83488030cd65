#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace curate {

// Worker cap: CURATE_WORKERS env var if set, else hardware concurrency.
// Always at least 1.
inline std::size_t worker_count() {
    if (const char* env = std::getenv("CURATE_WORKERS")) {
        long v = std::atol(env);
        if (v >= 1) return static_cast<std::size_t>(v);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Applies fn to indices [0, n). Work is split into fixed-size chunks whose
// boundaries depend only on n, and every result lands in its input slot, so
// output is identical for any worker count.
template <typename Fn>
void parallel_for(std::size_t n, Fn fn, std::size_t workers = 0) {
    if (workers == 0) workers = worker_count();
    if (n == 0) return;
    if (workers == 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t chunk = 64;
    const std::size_t num_chunks = (n + chunk - 1) / chunk;
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto work = [&] {
        for (;;) {
            std::size_t c = next.fetch_add(1);
            if (c >= num_chunks) return;
            std::size_t begin = c * chunk;
            std::size_t end = begin + chunk < n ? begin + chunk : n;
            try {
                for (std::size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> threads;
    std::size_t nthreads = std::min(workers, num_chunks);
    threads.reserve(nthreads);
    for (std::size_t t = 0; t < nthreads; ++t) threads.emplace_back(work);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

// Maps fn over items, preserving order.
template <typename T, typename Fn>
auto parallel_map(const std::vector<T>& items, Fn fn, std::size_t workers = 0)
    -> std::vector<decltype(fn(items.front()))> {
    std::vector<decltype(fn(items.front()))> out(items.size());
    parallel_for(items.size(), [&](std::size_t i) { out[i] = fn(items[i]); }, workers);
    return out;
}

}  // namespace curate
