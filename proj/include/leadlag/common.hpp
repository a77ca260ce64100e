#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace leadlag {

/// Raised for malformed or unusable input data (files, panels, matrices).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// splitmix64 finalizer; the basis of all seed derivation.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Counter-based seed derivation: child = mix(mix(master) ^ stream) ^ counter, mixed again.
/// Distinct (stream, counter) pairs give statistically independent child seeds.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t counter = 0) {
    return mix_seed(mix_seed(mix_seed(master) ^ stream) ^ counter);
}

/// Runs body(i) for i in [0, n) on up to `jobs` threads. Each index is
/// executed exactly once; callers write results into index-addressed slots so
/// output never depends on scheduling. The first exception is rethrown.
inline void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& body) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    const auto workers = std::min<std::size_t>(jobs, n);
    std::size_t next = 0;
    std::mutex mu;
    std::exception_ptr error;
    auto worker = [&] {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard lock(mu);
                if (next >= n || error) return;
                i = next++;
            }
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace leadlag
