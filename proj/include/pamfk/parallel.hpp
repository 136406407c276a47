#pragma once

#include <algorithm>
#include <cstdint>
#include <thread>
#include <vector>

namespace pamfk {

// Runs fn(ctx, index) for index = 0..n-1 and folds the records strictly in
// index order. Work is parallelized in chunks; the fold stays sequential, so
// the result is bit-identical for every worker count. make_ctx() provides
// per-thread scratch state.
template <class Record, class MakeCtx, class Fn, class Fold>
void run_indexed_samples(std::int64_t n, int workers, MakeCtx&& make_ctx, Fn&& fn, Fold&& fold)
{
    if (workers <= 1) {
        auto ctx = make_ctx();
        for (std::int64_t i = 0; i < n; ++i) fold(fn(ctx, i));
        return;
    }

    constexpr std::int64_t kChunk = 8192;
    std::vector<Record> buffer;
    for (std::int64_t c0 = 0; c0 < n; c0 += kChunk) {
        const std::int64_t c1 = std::min(n, c0 + kChunk);
        const std::int64_t span = c1 - c0;
        buffer.resize(span);
        const int w = static_cast<int>(std::min<std::int64_t>(workers, span));
        const std::int64_t per = (span + w - 1) / w;
        std::vector<std::thread> threads;
        threads.reserve(w);
        for (int tid = 0; tid < w; ++tid) {
            const std::int64_t lo = c0 + tid * per;
            const std::int64_t hi = std::min(c1, lo + per);
            if (lo >= hi) break;
            threads.emplace_back([&, lo, hi] {
                auto ctx = make_ctx();
                for (std::int64_t i = lo; i < hi; ++i) buffer[i - c0] = fn(ctx, i);
            });
        }
        for (auto& th : threads) th.join();
        for (std::int64_t i = 0; i < span; ++i) fold(buffer[i]);
    }
}

} // namespace pamfk
