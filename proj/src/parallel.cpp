#include "cvilab/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cvilab {

int thread_limit_from_env() {
    const char* raw = std::getenv("CVILAB_THREADS");
    if (raw == nullptr || *raw == '\0') {
        return 0;
    }
    int n = 0;
    const char* end = raw + std::strlen(raw);
    auto [ptr, ec] = std::from_chars(raw, end, n);
    if (ec != std::errc{} || ptr != end || n < 1) {
        return 0;
    }
    return n;
}

void apply_thread_limit() {
#ifdef _OPENMP
    static const int default_threads = omp_get_max_threads();
    const int n = thread_limit_from_env();
    omp_set_num_threads(n > 0 ? n : default_threads);
#endif
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace cvilab
