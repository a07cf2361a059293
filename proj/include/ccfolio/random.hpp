#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ccfolio {

/// Seeded sampler with fixed, documented transforms so that a given seed
/// reproduces the same stream on every platform:
///   uniform:     (mt19937_64() >> 11) * 2^-53          in [0, 1)
///   normal:      Box-Muller, sqrt(-2 ln u1) cos(2 pi u2), two uniforms each
///   exponential: inverse CDF, -ln(1 - u) / rate
class DeterministicSampler {
public:
    explicit DeterministicSampler(std::uint64_t seed) : engine_(seed) {}

    /// Uniform draw in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform draw in (0, 1], safe as a logarithm argument.
    double uniform_positive() {
        return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
    }

    double normal(double mean = 0.0, double stddev = 1.0) {
        constexpr double two_pi = 6.2831853071795864769252867666;
        const double u1 = uniform_positive();
        const double u2 = uniform();
        return mean + stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

    double exponential(double rate) {
        return -std::log(1.0 - uniform()) / rate;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace ccfolio
