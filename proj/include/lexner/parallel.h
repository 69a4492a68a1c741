#pragma once

// Conditional OpenMP helpers. Without OpenMP everything runs on one thread.

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lexner {

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline int thread_index() {
#ifdef _OPENMP
  return omp_get_thread_num();
#else
  return 0;
#endif
}

}  // namespace lexner
