#pragma once

#include <functional>

namespace lsv {

// thread count: LSVCAL_THREADS env var overrides the CLI/config value; 0 or
// unset falls through; result clamped to >= 1
int resolve_threads(int requested);

// static striding over [0, n); results are written to disjoint slots by the
// callers, so the outcome is bitwise independent of the thread count
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace lsv
