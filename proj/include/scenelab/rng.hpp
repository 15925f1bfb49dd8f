#pragma once

#include <cstdint>
#include <cstddef>
#include <cmath>
#include <cassert>
#include <string_view>
#include <vector>

namespace scenelab {

// splitmix64 step; used for seeding and for hash-mixing seed paths.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// FNV-1a over a tag string, for deriving stage seeds by name.
inline std::uint64_t hash_tag(std::string_view tag) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

// Mixes a master seed with a path of components into one well-spread seed.
// Streams derived from distinct paths are independent, so per-item RNGs can
// be created in any parallel schedule without changing the output.
inline std::uint64_t mix_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = seed;
    std::uint64_t out = splitmix64(s);
    for (std::uint64_t p : path) {
        s ^= p + 0x9e3779b97f4a7c15ull;
        out ^= splitmix64(s);
    }
    return out;
}

// xoshiro256** 1.0. Hand-rolled so streams are identical on every platform;
// std::mt19937 would do, but the std distributions are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& w : state_) w = splitmix64(s);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform in [0, 1) with 53 random bits
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // unbiased uniform in [0, n)
    std::uint64_t next_below(std::uint64_t n) {
        assert(n > 0);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    // uniform integer in [lo, hi], inclusive
    int next_int(int lo, int hi) {
        assert(lo <= hi);
        return lo + static_cast<int>(next_below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Box-Muller, cosine branch only (no cached spare, so the stream state
    // is a pure function of the number of draws).
    double next_gaussian() {
        const double u1 = 1.0 - next_double();
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    // index draw proportional to nonnegative weights (at least one positive)
    std::size_t pick_weighted(const double* weights, std::size_t n) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += weights[i];
        assert(total > 0.0);
        double u = next_double() * total;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            u -= weights[i];
            if (u < 0.0) return i;
        }
        return n - 1;
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(next_below(i));
            using std::swap;
            swap(v[i - 1], v[j]);
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4];
};

} // namespace scenelab
