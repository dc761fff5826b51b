#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace scedae {

/// Counter-based pseudo-random generator. The draw sequence is a pure
/// function of (seed, stream); derive(label) yields an independent stream
/// that is a pure function of (seed, stream, label). No global state, no
/// reliance on implementation-defined std distributions, so every draw is
/// bit-identical across platforms, runs, and thread counts.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream), state_(mix(mix(seed) ^ rotl(mix(stream), 31))) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    /// Independent child stream addressed by a label. Sibling streams with
    /// distinct labels never interact, so adding or removing one consumer
    /// does not perturb the draws seen by the others.
    SeededRng derive(std::uint64_t label) const {
        return SeededRng(seed_, mix(stream_ ^ rotl(mix(label ^ 0x9e3779b97f4a7c15ull), 17)));
    }

    /// A single 64-bit key summarizing (seed, stream); usable as the seed of
    /// a downstream component that takes one integer.
    std::uint64_t key() const { return mix(state_); }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * u01(); }

    /// Standard normal via Box-Muller; draws two uniforms per pair.
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = u01(), u2 = u01();
        // Guard the log: u01() can return exactly 0.
        while (u1 <= 0.0) u1 = u01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

    /// Uniform integer in [0, n), unbiased via rejection. n must be > 0.
    std::size_t below(std::size_t n) {
        const std::uint64_t bound = n;
        const std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return static_cast<std::size_t>(r % bound);
        }
    }

    /// In-place Fisher-Yates shuffle.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = below(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    // splitmix64 finalizer.
    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t state_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace scedae
