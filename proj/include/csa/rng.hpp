#pragma once

#include <cstdint>
#include <limits>

namespace csa {

// Counter-splittable PRNG. Each stream is keyed by (seed, counter), so a
// Monte Carlo harness can hand frame i the stream (seed, i) and get results
// that do not depend on how frames are distributed over workers.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t state) : state_(state) {}

    static SplitMix64 for_substream(std::uint64_t seed, std::uint64_t counter) {
        // One mixing round over the key keeps distinct (seed, counter) pairs
        // from producing correlated streams.
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (counter + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return SplitMix64(z ^ (z >> 31));
    }

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    result_type operator()() { return next(); }
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<std::uint64_t>::max(); }

    // Unbiased integer in [0, bound) via Lemire's multiply-shift rejection.
    std::uint64_t below(std::uint64_t bound) {
        unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < bound) {
            const std::uint64_t threshold = (0ULL - bound) % bound;
            while (lo < threshold) {
                m = static_cast<unsigned __int128>(next()) * bound;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

// Floyd's algorithm: k distinct values from {0, ..., n-1}, written to out
// in ascending order. Requires k <= n and out with room for k entries.
template <typename OutIt>
void sample_distinct_sorted(SplitMix64& rng, std::uint64_t n, std::uint64_t k, OutIt out_begin) {
    OutIt end = out_begin;
    for (std::uint64_t j = n - k; j < n; ++j) {
        std::uint64_t t = rng.below(j + 1);
        // insertion keeps the output sorted; duplicates promote to j
        OutIt it = out_begin;
        bool dup = false;
        for (; it != end; ++it) {
            if (*it == t) { dup = true; break; }
        }
        std::uint64_t v = dup ? j : t;
        it = end++;
        while (it != out_begin && *(it - 1) > v) {
            *it = *(it - 1);
            --it;
        }
        *it = v;
    }
}

}  // namespace csa
