#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tkgrb {

inline unsigned default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// Static chunking over [0, n). body(begin, end) runs on at most `workers`
// threads; chunk boundaries depend only on (n, workers), so output slots
// indexed by position are filled identically for any schedule.
template <typename Body>
void parallel_chunks(std::size_t n, unsigned workers, Body&& body) {
    if (workers == 0) workers = default_workers();
    if (n == 0) return;
    if (workers <= 1 || n < 2) {
        body(std::size_t{0}, n);
        return;
    }
    const std::size_t num_chunks = std::min<std::size_t>(workers, n);
    const std::size_t base = n / num_chunks;
    const std::size_t rem = n % num_chunks;

    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> threads;
    threads.reserve(num_chunks);
    std::size_t begin = 0;
    for (std::size_t c = 0; c < num_chunks; ++c) {
        const std::size_t len = base + (c < rem ? 1 : 0);
        const std::size_t end = begin + len;
        threads.emplace_back([&, begin, end] {
            try {
                body(begin, end);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
        begin = end;
    }
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace tkgrb
