#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ssafreq::rng {

// SplitMix64 step (Steele, Lea, Flood 2014). Used only to derive independent
// stream seeds; the sampling stream itself is mt19937_64.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Deterministic seed for Monte Carlo run `run` of sweep point `point`.
// Mixing through SplitMix64 decorrelates seeds that differ in one index.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t point, std::uint64_t run) {
    std::uint64_t s = master;
    std::uint64_t z = splitmix64(s);
    s ^= z + point;
    z = splitmix64(s);
    s ^= z + run;
    return splitmix64(s);
}

// Uniform double in [0, 1) with 53 random bits. The shift-based mapping is
// exactly reproducible across platforms, unlike
// std::uniform_real_distribution.
inline double u01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

namespace detail {

// Inversion by sequential search; exact for modest means. The iteration cap
// only guards pathological u ~ 1 rounding; it is far beyond any realistically
// reachable quantile.
inline std::uint64_t poisson_inversion(double mean, std::mt19937_64& gen) {
    const double u = u01(gen);
    double p = std::exp(-mean);
    double cdf = p;
    std::uint64_t k = 0;
    const std::uint64_t cap = static_cast<std::uint64_t>(mean + 10.0 * std::sqrt(mean) + 100.0);
    while (u >= cdf && k < cap) {
        ++k;
        p *= mean / static_cast<double>(k);
        cdf += p;
    }
    return k;
}

} // namespace detail

// Poisson draw, deterministic for a fixed generator state and bit-identical
// across platforms. Large means are decomposed into a sum of independent
// draws with mean <= 30 (a Poisson sum is Poisson), which keeps the
// sequential search exact and O(mean) without a normal approximation.
inline std::uint64_t poisson(double mean, std::mt19937_64& gen) {
    if (mean <= 0) return 0;
    if (mean <= 30.0) return detail::poisson_inversion(mean, gen);
    const auto chunks = static_cast<std::uint64_t>(mean / 30.0) + 1;
    const double part = mean / static_cast<double>(chunks);
    std::uint64_t total = 0;
    for (std::uint64_t c = 0; c < chunks; ++c) total += detail::poisson_inversion(part, gen);
    return total;
}

} // namespace ssafreq::rng
