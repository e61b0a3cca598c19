#include "dfs/parallel.hpp"

#include <cstdlib>

#ifdef DFS_HAVE_OPENMP
#include <omp.h>
#endif

namespace dfs {

namespace {
int resolve_default() {
    if (const char* env = std::getenv("DFS_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
#ifdef DFS_HAVE_OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

int g_threads = resolve_default();
}  // namespace

void set_threads(int n) { g_threads = n < 1 ? 1 : n; }
int threads() { return g_threads; }

bool parallel_enabled() {
#ifdef DFS_HAVE_OPENMP
    return g_threads > 1;
#else
    return false;
#endif
}

namespace detail {
void parallel_for_impl(std::size_t n, void* ctx, void (*body)(void*, std::size_t)) {
#ifdef DFS_HAVE_OPENMP
#pragma omp parallel for schedule(static) num_threads(g_threads)
    for (long long i = 0; i < static_cast<long long>(n); ++i) body(ctx, static_cast<std::size_t>(i));
#else
    for (std::size_t i = 0; i < n; ++i) body(ctx, i);
#endif
}
}  // namespace detail

}  // namespace dfs
