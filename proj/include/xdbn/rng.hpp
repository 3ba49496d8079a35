#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace xdbn {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t mix3(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return splitmix64(a ^ splitmix64(b ^ splitmix64(c)));
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

}  // namespace detail

// Deterministic random stream. mt19937_64 is bit-exact across platforms and
// all variate transforms are implemented here rather than through the
// implementation-defined std distributions, so a (seed, algorithm) pair fully
// pins the draw sequence. A stream is single-owner; use split() to hand
// independent children to concurrent consumers. Splitting is a pure function
// of (seed, key), not of the parent's draw position.
class RngStream {
   public:
    explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    static constexpr const char* algorithm() { return "mt19937_64/splitmix64-split"; }

    std::uint64_t seed() const { return seed_; }

    RngStream split(std::uint64_t key) const {
        return RngStream(detail::splitmix64(seed_ ^ detail::splitmix64(key)));
    }

    RngStream split(std::string_view label) const {
        return split(detail::fnv1a64(label));
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Uniform integer in [0, n). Modulo bias is < n / 2^64, irrelevant here.
    std::uint64_t below(std::uint64_t n) { return engine_() % n; }

    bool bernoulli(double p) { return uniform01() < p; }

    // Box-Muller; consumes exactly two uniform draws per call.
    double normal() {
        double u1 = uniform01();
        double u2 = uniform01();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            std::size_t j = static_cast<std::size_t>(below(i + 1));
            std::swap(v[i], v[j]);
        }
    }

    // n distinct indices drawn without replacement from [0, pool).
    std::vector<std::size_t> sample_without_replacement(std::size_t pool, std::size_t n) {
        std::vector<std::size_t> idx(pool);
        for (std::size_t i = 0; i < pool; ++i) idx[i] = i;
        shuffle(idx);
        idx.resize(std::min(n, pool));
        return idx;
    }

   private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace xdbn
