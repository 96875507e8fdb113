#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ctmg {

/// Selects between the OpenMP kernel and its serial reference.
enum class Execution { Serial, Parallel };

inline int availableThreads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

} // namespace ctmg
