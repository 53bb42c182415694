#pragma once

// OpenMP constructs go through RBP_OMP so the library still builds (serially)
// without OpenMP support.
#define RBP_PRAGMA(X) _Pragma(#X)

#ifdef _OPENMP
#include <omp.h>
#define RBP_OMP(ARGS) RBP_PRAGMA(omp ARGS)
#else
#define RBP_OMP(ARGS)
#endif

namespace rbp {

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace rbp
