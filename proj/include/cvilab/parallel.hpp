#pragma once

namespace cvilab {

// Worker cap from CVILAB_THREADS; 0 when unset or invalid (meaning "auto").
int thread_limit_from_env();

// Applies CVILAB_THREADS to the OpenMP runtime. Safe to call repeatedly.
void apply_thread_limit();

int max_threads();

}  // namespace cvilab
