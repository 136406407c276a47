#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace pamfk {

// Identifies one independent random stream. Streams are derived purely from
// the key, so any (sample, path copy) work unit can be generated in isolation
// and in any order without shared state.
struct StreamKey {
    std::uint64_t seed = 0;
    std::uint64_t index = 0;  // sample or replication id
    std::uint32_t lane = 0;   // per-path copy / per-tuple sub-stream
};

namespace detail {

inline void mulhilo32(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo)
{
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

} // namespace detail

// Philox4x32-10 keyed block function (Salmon et al., SC'11). The 128-bit
// counter is laid out as (block, index_lo, index_hi, lane) and the key is
// the 64-bit seed, so distinct StreamKeys address disjoint counter blocks.
// One stream can emit 2^32 blocks (~8.6e9 doubles), far beyond what a
// single work unit consumes.
class CounterRng {
public:
    explicit CounterRng(const StreamKey& key)
    {
        key0_ = static_cast<std::uint32_t>(key.seed);
        key1_ = static_cast<std::uint32_t>(key.seed >> 32);
        ctr1_ = static_cast<std::uint32_t>(key.index);
        ctr2_ = static_cast<std::uint32_t>(key.index >> 32);
        ctr3_ = key.lane;
        block_ = 0;
        pos_ = 4;
    }

    std::uint32_t next_u32()
    {
        if (pos_ == 4) {
            generate_block();
            pos_ = 0;
        }
        return out_[pos_++];
    }

    std::uint64_t next_u64()
    {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    // Uniform on (0,1]; safe as an argument of log().
    double uniform_pos()
    {
        return ((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Uniform on [0,1).
    double uniform()
    {
        return (next_u64() >> 11) * 0x1.0p-53;
    }

private:
    void generate_block()
    {
        std::uint32_t c0 = block_;
        std::uint32_t c1 = ctr1_;
        std::uint32_t c2 = ctr2_;
        std::uint32_t c3 = ctr3_;
        std::uint32_t k0 = key0_, k1 = key1_;
        for (int round = 0; round < 10; ++round) {
            std::uint32_t hi0, lo0, hi1, lo1;
            detail::mulhilo32(kMul0, c0, hi0, lo0);
            detail::mulhilo32(kMul1, c2, hi1, lo1);
            const std::uint32_t n0 = hi1 ^ c1 ^ k0;
            const std::uint32_t n1 = lo1;
            const std::uint32_t n2 = hi0 ^ c3 ^ k1;
            const std::uint32_t n3 = lo0;
            c0 = n0; c1 = n1; c2 = n2; c3 = n3;
            k0 += kWeyl0;
            k1 += kWeyl1;
        }
        out_ = {c0, c1, c2, c3};
        ++block_;
    }

    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    std::uint32_t key0_ = 0, key1_ = 0;
    std::uint32_t ctr1_ = 0, ctr2_ = 0, ctr3_ = 0;
    std::uint32_t block_ = 0;
    std::array<std::uint32_t, 4> out_{};
    int pos_ = 4;
};

// Standard normal stream on top of CounterRng (Box-Muller, pairwise).
class NormalStream {
public:
    explicit NormalStream(const StreamKey& key) : rng_(key) {}

    double normal()
    {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = rng_.uniform_pos();
        const double u2 = rng_.uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double uniform() { return rng_.uniform(); }
    double uniform_pos() { return rng_.uniform_pos(); }

private:
    CounterRng rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

inline NormalStream derive_stream(const StreamKey& key) { return NormalStream(key); }

} // namespace pamfk
