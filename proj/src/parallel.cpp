#include "lsvcal/parallel.hpp"

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace lsv {

int resolve_threads(int requested) {
    if (const char* env = std::getenv("LSVCAL_THREADS")) {
        try {
            int n = std::stoi(env);
            if (n >= 1) return n;
        } catch (...) {
        }
    }
    return requested >= 1 ? requested : 1;
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    int nw = std::min(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(nw);
    for (int t = 0; t < nw; ++t)
        pool.emplace_back([=, &fn]() {
            for (int i = t; i < n; i += nw) fn(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace lsv
