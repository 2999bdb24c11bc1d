#include "pvgan/nn_threads.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace pvgan::nn {

namespace {
std::atomic<int> g_threads{1};
}

void set_math_threads(int n) { g_threads.store(std::max(1, n)); }

int math_threads() { return g_threads.load(); }

void parallel_for(std::int64_t count, const std::function<void(std::int64_t, std::int64_t)>& fn) {
    if (count <= 0) return;
    const int threads = std::min<std::int64_t>(g_threads.load(), count);
    if (threads <= 1) {
        fn(0, count);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    const std::int64_t chunk = (count + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const std::int64_t begin = t * chunk;
        const std::int64_t end = std::min<std::int64_t>(begin + chunk, count);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace pvgan::nn
