#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace curvtomo {

namespace detail {
inline int& thread_override() {
    static int n = 0;
    return n;
}
}  // namespace detail

/// Sets the worker count used by every parallel loop. Zero restores the
/// default: CURVTOMO_THREADS if set, otherwise the OpenMP default.
inline void set_thread_count(int n) { detail::thread_override() = std::max(0, n); }

inline int thread_count() {
    if (detail::thread_override() > 0) return detail::thread_override();
    if (const char* env = std::getenv("CURVTOMO_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

/// Runs body(i) for i in [0, n) with a static partition. The first exception
/// thrown by any iteration is rethrown on the calling thread.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
    std::exception_ptr error;
    std::mutex error_mutex;
    const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(static) num_threads(thread_count())
    for (long long i = 0; i < count; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
}

/// Fixed number of reduction chunks. Partial results are combined in chunk
/// order, so sums do not depend on the thread count.
inline constexpr std::size_t kReductionChunks = 64;

/// Calls body(chunk, begin, end) for a fixed partition of [0, n) into at most
/// kReductionChunks contiguous ranges.
template <class Body>
void for_each_chunk(std::size_t n, Body&& body) {
    const std::size_t chunks = std::min<std::size_t>(kReductionChunks, std::max<std::size_t>(n, 1));
    parallel_for(chunks, [&](std::size_t c) {
        const std::size_t begin = n * c / chunks;
        const std::size_t end = n * (c + 1) / chunks;
        body(c, begin, end);
    });
}

}  // namespace curvtomo
