#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace promptforge {

/// Seeded pseudo-random source used everywhere randomness is needed.
///
/// Wraps std::mt19937_64 but maps raw bits to ranges itself, so sequences are
/// identical across standard library implementations (the std distributions
/// are implementation-defined).
class Rng {
  public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    static constexpr result_type min() { return std::numeric_limits<result_type>::min(); }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() { return engine_(); }

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

    /// Uniform integer in [0, n). n must be positive.
    std::size_t uniform_index(std::size_t n);

    /// Uniform double in [0, 1) with 53 bits of precision.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = uniform_index(i);
            using std::swap;
            swap(items[i - 1], items[j]);
        }
    }

    /// Independent child stream, a pure function of (seed, stream).
    [[nodiscard]] Rng fork(std::uint64_t stream) const;

  private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; used to derive seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// FNV-1a over bytes; stable across platforms, unlike std::hash.
constexpr std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) noexcept {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace promptforge
