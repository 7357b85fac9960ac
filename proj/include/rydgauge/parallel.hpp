#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace rydgauge {

// Runs body(i) for i in [0, n) on up to `threads` workers. The first exception is rethrown.
inline void parallel_for(int n, int threads, const std::function<void(int)>& body) {
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex m;
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(m);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// Splits [0, n) into contiguous chunks and runs body(begin, end) on each.
inline void parallel_chunks(size_t n, int threads, const std::function<void(size_t, size_t)>& body) {
    if (threads <= 1 || n < 4096) {
        body(0, n);
        return;
    }
    const int chunks = threads;
    parallel_for(chunks, threads, [&](int c) {
        const size_t b = n * c / chunks, e = n * (c + 1) / chunks;
        body(b, e);
    });
}

}  // namespace rydgauge
