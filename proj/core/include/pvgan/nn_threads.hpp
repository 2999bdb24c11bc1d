#pragma once

#include <cstdint>
#include <functional>

namespace pvgan::nn {

// Math-kernel thread count. Default 1; determinism is only guaranteed there.
// Multi-threaded mode splits work over disjoint output slabs, so in practice
// results stay bit-stable, but we do not promise it.
void set_math_threads(int n);
int math_threads();

// Runs fn(begin, end) over [0, count) split into contiguous chunks, one per
// worker. With one thread this is a plain inline call.
void parallel_for(std::int64_t count, const std::function<void(std::int64_t, std::int64_t)>& fn);

}  // namespace pvgan::nn
