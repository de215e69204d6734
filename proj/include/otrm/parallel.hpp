#pragma once

#include <algorithm>
#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace otrm {

// Runs body(i) for i in [0, n). Each call must write only to its own
// preassigned slot; reductions happen serially afterwards, so results are
// byte-identical for every worker count (workers <= 1 runs the plain serial
// loop, used as the reference path in tests).
template <class F>
void parallel_for(int n, int workers, F&& body) {
#ifdef _OPENMP
    if (workers > 1) {
#pragma omp parallel for schedule(static) num_threads(workers)
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
#else
    (void)workers;
#endif
    for (int i = 0; i < n; ++i) body(i);
}

// Like parallel_for, but body may throw: exceptions are captured per index
// and the lowest-index one is rethrown after the loop, so a failure surfaces
// identically no matter how many workers ran.
template <class F>
void parallel_for_safe(int n, int workers, F&& body) {
    std::vector<std::exception_ptr> errs(static_cast<size_t>(std::max(n, 0)));
    parallel_for(n, workers, [&](int i) {
        try {
            body(i);
        } catch (...) {
            errs[static_cast<size_t>(i)] = std::current_exception();
        }
    });
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

inline int hardware_workers() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace otrm
