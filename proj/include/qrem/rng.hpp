#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace qrem {

/// SplitMix64 step; used to spread seeds into independent sub-streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for sub-stream `stream` of a master seed.  Every component that
/// consumes randomness derives its own stream so that results stay
/// byte-identical regardless of evaluation order elsewhere.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(splitmix64(master) ^ splitmix64(stream * 0x9e3779b97f4a7c15ULL + 1));
}

/// Deterministic random source.  All distributions are implemented by
/// hand on top of raw engine words so that streams do not depend on the
/// standard library's unspecified <random> algorithms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    static Rng substream(std::uint64_t master, std::uint64_t stream) {
        return Rng(derive_seed(master, stream));
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n).
    std::uint64_t integer(std::uint64_t n) {
        // Rejection-free modulo is biased for huge n; all uses here have
        // n far below 2^32 so multiply-shift is exact enough and fast.
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    }

    bool bit() { return (eng_() >> 63) != 0; }

    /// +1 or -1 with equal probability.
    int pm_one() { return bit() ? 1 : -1; }

    /// Standard normal via Box-Muller (pair cached).
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace qrem
