// parallel.hpp: Thread-cap lookup and an exception-safe parallel loop for
// independent work items (sweeps, batch jobs). A serial twin with identical
// semantics is kept as the reference path.

#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace stirap::parallel {

// STIRAP_THREADS caps fan-out when set to a positive integer
inline int thread_cap() {
    if (const char* env = std::getenv("STIRAP_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

// Reference implementation: same contract as parallel_for, one thread
template <typename Fn>
void serial_for(int n, Fn&& fn) {
    std::exception_ptr failure;
    for (int i = 0; i < n; ++i) {
        try {
            fn(i);
        } catch (...) {
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

// Run fn(i) for i in [0, n); iterations must be independent and write only
// their own slots. The first exception is rethrown after the loop drains.
template <typename Fn>
void parallel_for(int n, Fn&& fn, int max_threads = 0) {
    if (n <= 0) return;
    int cap = max_threads > 0 ? max_threads : thread_cap();
    if (cap <= 1 || n == 1) {
        serial_for(n, std::forward<Fn>(fn));
        return;
    }
#ifdef _OPENMP
    std::exception_ptr failure;
    std::mutex guard;
#pragma omp parallel for schedule(dynamic) num_threads(std::min(cap, n))
    for (int i = 0; i < n; ++i) {
        try {
            fn(i);
        } catch (...) {
            std::lock_guard<std::mutex> lock(guard);
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
#else
    serial_for(n, std::forward<Fn>(fn));
#endif
}

} // namespace stirap::parallel
