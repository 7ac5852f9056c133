// Copyright (C) 2026 The uhredit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace uhredit {

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

// Resolves a user-facing worker count; 0 means "use the OpenMP default".
inline int resolve_workers(int requested) {
  return requested > 0 ? requested : max_threads();
}

}  // namespace uhredit
