#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>

namespace climdem {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// FNV-1a, used to turn substream names into stable integers.
[[nodiscard]] constexpr std::uint64_t hash_name(std::string_view name) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Seed of a named substream of a master seed.
[[nodiscard]] constexpr std::uint64_t substream(std::uint64_t seed, std::string_view name) noexcept {
    return mix64(seed ^ mix64(hash_name(name)));
}

/// Seed of the `index`-th work item (bootstrap replicate, tree, ...) under `seed`.
[[nodiscard]] constexpr std::uint64_t substream(std::uint64_t seed, std::uint64_t index) noexcept {
    return mix64(mix64(seed) + 0x632be59bd9b4e019ULL * (index + 1));
}

[[nodiscard]] inline Rng make_rng(std::uint64_t seed) { return Rng(mix64(seed)); }

/// Uniform integer in [0, n). Implemented directly so draws do not depend on the
/// standard library's distribution algorithms.
[[nodiscard]] inline std::size_t uniform_index(Rng& rng, std::size_t n) {
    // Lemire's nearly divisionless method with rejection.
    const std::uint64_t range = n;
    std::uint64_t x = rng();
    __uint128_t m = static_cast<__uint128_t>(x) * range;
    auto low = static_cast<std::uint64_t>(m);
    if (low < range) {
        const std::uint64_t threshold = (0 - range) % range;
        while (low < threshold) {
            x = rng();
            m = static_cast<__uint128_t>(x) * range;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::size_t>(m >> 64);
}

/// Uniform real in [0, 1) with 53 random bits.
[[nodiscard]] inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Standard normal via Marsaglia's polar method.
class NormalSampler {
public:
    double operator()(Rng& rng) {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u = 0.0, v = 0.0, s = 0.0;
        do {
            u = 2.0 * uniform01(rng) - 1.0;
            v = 2.0 * uniform01(rng) - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

private:
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace climdem
