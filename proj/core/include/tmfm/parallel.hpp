// Block-partitioned parallel_for. Work items own their RNG streams, so the
// result is identical for any thread count; reductions must combine block
// results in index order to stay bitwise reproducible.

#ifndef TMFM_PARALLEL_HPP
#define TMFM_PARALLEL_HPP

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace tmfm {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Invokes fn(begin, end) on contiguous index blocks. fn must not touch
// state shared across blocks.
inline void parallel_for_blocks(std::size_t count, int threads,
                                const std::function<void(std::size_t, std::size_t)>& fn) {
    const int n_threads = resolve_threads(threads);
    if (n_threads <= 1 || count < 2) {
        fn(0, count);
        return;
    }
    const std::size_t n_blocks = static_cast<std::size_t>(n_threads);
    const std::size_t block = (count + n_blocks - 1) / n_blocks;
    std::vector<std::thread> pool;
    pool.reserve(n_blocks);
    for (std::size_t b = 0; b < n_blocks; ++b) {
        const std::size_t begin = b * block;
        if (begin >= count) break;
        const std::size_t end = std::min(count, begin + block);
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace tmfm

#endif  // TMFM_PARALLEL_HPP
