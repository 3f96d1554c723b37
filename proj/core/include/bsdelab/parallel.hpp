#pragma once

#include <cstddef>
#include <functional>

namespace bsdelab {

// Worker threads used by block-parallel loops. 0 restores the hardware default.
void set_max_threads(int n);
int max_threads();

// Fixed block size used by every parallel reduction in the library. Reductions
// accumulate per block and combine blocks in index order, so results do not
// depend on the thread count.
inline constexpr std::size_t kReductionBlock = 8192;

// Runs fn(begin, end) over consecutive [begin, end) blocks covering [0, n).
// Blocks may run on any thread in any order; fn must only touch state owned by
// its block (disjoint output slots, or a per-block accumulator slot).
void parallel_for_blocks(std::size_t n, std::size_t block,
                         const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace bsdelab
