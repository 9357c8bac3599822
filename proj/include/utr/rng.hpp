#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace utr {

// Portable randomness. std::mt19937_64's output sequence is fixed by the
// standard, but the std distributions are not, so every draw goes through the
// helpers below.

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Sub-seed for one stochastic operation on one item. Depends only on its
/// arguments, so per-item outputs do not depend on processing order.
constexpr std::uint64_t derive_seed(std::uint64_t run_seed, std::string_view operation,
                                    std::string_view item) noexcept {
    std::uint64_t h = splitmix64(run_seed);
    h = splitmix64(h ^ fnv1a64(operation));
    return splitmix64(h ^ fnv1a64(item));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t index(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

    /// Uniform integer in [lo, hi] (inclusive).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(index(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    bool bernoulli(double p) { return uniform01() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[index(i)]);
        }
    }

    /// k distinct values from [0, n), in draw order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        for (std::size_t i = 0; i < k && i < n; ++i) {
            std::swap(pool[i], pool[i + index(n - i)]);
        }
        pool.resize(k < n ? k : n);
        return pool;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace utr
