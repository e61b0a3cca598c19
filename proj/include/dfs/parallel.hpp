#pragma once

#include <cstddef>

namespace dfs {

// Thread control for the OpenMP-backed loops. 1 selects the serial reference
// path; results are bit-identical either way because every parallel loop
// writes disjoint slots and reductions run in a fixed order afterwards.
void set_threads(int n);
int threads();
bool parallel_enabled();

namespace detail {
void parallel_for_impl(std::size_t n, void* ctx, void (*body)(void*, std::size_t));
}

template <typename F>
void parallel_for(std::size_t n, F&& f) {
    if (!parallel_enabled() || n < 2) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    detail::parallel_for_impl(n, &f, [](void* ctx, std::size_t i) { (*static_cast<F*>(ctx))(i); });
}

}  // namespace dfs
