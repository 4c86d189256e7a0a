#include "dynamo/parallel.hpp"

#include <omp.h>

#include <cstdlib>

namespace dynamo {

namespace {

int resolve_from_env() {
    const char* env = std::getenv("DYNAMO_THREADS");
    if (env == nullptr || *env == '\0') return omp_get_max_threads();
    const int n = std::atoi(env);
    if (n <= 0) return omp_get_max_threads();
    return n;
}

int g_override = 0;

}  // namespace

int max_threads() {
    if (g_override > 0) return g_override;
    static const int cached = resolve_from_env();
    return cached;
}

bool parallel_enabled() { return max_threads() > 1; }

void set_max_threads(int n) { g_override = n > 0 ? n : 0; }

}  // namespace dynamo
