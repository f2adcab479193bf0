#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace cs_spectra {

// Worker-count budget shared by all internally parallel operations.
// Resolution order: explicit set_thread_budget() (CLI --threads), else the
// CS_SPECTRA_THREADS environment variable, else hardware concurrency.
// Results never depend on the budget: work is split into fixed-size chunks
// and chunk results are combined in index order.
inline int& thread_budget_slot() {
    static int budget = 0;  // 0 = unresolved
    return budget;
}

inline void set_thread_budget(int n) { thread_budget_slot() = n > 0 ? n : 1; }

inline int thread_budget() {
    int& slot = thread_budget_slot();
    if (slot > 0) return slot;
    if (const char* env = std::getenv("CS_SPECTRA_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0 && v < 1024) {
            slot = static_cast<int>(v);
            return slot;
        }
    }
    unsigned hc = std::thread::hardware_concurrency();
    slot = hc > 0 ? static_cast<int>(hc) : 1;
    return slot;
}

// Evaluate fn(begin, end) over [0, count) split into fixed chunks; returns one
// R per chunk, in chunk order, independent of how many threads ran.
template <class R, class ChunkFn>
std::vector<R> map_chunks(std::size_t count, std::size_t chunk_size, ChunkFn fn) {
    if (chunk_size == 0) chunk_size = 1;
    const std::size_t n_chunks = count == 0 ? 0 : (count + chunk_size - 1) / chunk_size;
    std::vector<R> results(n_chunks);
    if (n_chunks == 0) return results;

    const int budget = thread_budget();
    const std::size_t workers =
        std::min<std::size_t>(n_chunks, budget > 0 ? static_cast<std::size_t>(budget) : 1);

    if (workers <= 1) {
        for (std::size_t i = 0; i < n_chunks; ++i) {
            const std::size_t begin = i * chunk_size;
            const std::size_t end = std::min(count, begin + chunk_size);
            results[i] = fn(begin, end);
        }
        return results;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n_chunks || failed.load()) return;
                const std::size_t begin = i * chunk_size;
                const std::size_t end = std::min(count, begin + chunk_size);
                try {
                    results[i] = fn(begin, end);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    failed.store(true);
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
    return results;
}

}  // namespace cs_spectra
