#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace risklab {

inline int effective_jobs(int jobs) {
#ifdef _OPENMP
    if (jobs <= 0) return omp_get_max_threads();
    return jobs;
#else
    (void)jobs;
    return 1;
#endif
}

// Runs fn(i) for i in [0, n). jobs <= 0 means "all cores", jobs == 1 is the
// serial reference path. Bodies must be independent; results must not depend
// on execution order.
template <typename F>
void parallel_for(long n, int jobs, F&& fn) {
    (void)jobs;
#ifdef _OPENMP
    if (effective_jobs(jobs) > 1) {
#pragma omp parallel for schedule(dynamic, 8) num_threads(effective_jobs(jobs))
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
#endif
    for (long i = 0; i < n; ++i) fn(i);
}

} // namespace risklab
