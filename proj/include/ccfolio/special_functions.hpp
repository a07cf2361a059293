#pragma once

#include <cmath>

#include "ccfolio/errors.hpp"

namespace ccfolio {

namespace detail {

// Maclaurin series erf(x) = 2/sqrt(pi) * sum (-1)^n x^(2n+1) / (n! (2n+1)).
// Converges quickly for |x| <= 2; the largest term is ~2.4 at x = 2, so the
// alternating sum loses at most one digit.
inline double erf_series(double x) {
    constexpr double two_over_sqrt_pi = 1.1283791670955125738961589031;
    const double x2 = x * x;
    double term = x;        // x^(2n+1) / n!
    double sum = x;         // term / (2n+1) accumulated
    for (int n = 1; n < 200; ++n) {
        term *= -x2 / n;
        const double contrib = term / (2 * n + 1);
        sum += contrib;
        if (std::abs(contrib) < 1e-18 * std::abs(sum)) break;
    }
    return two_over_sqrt_pi * sum;
}

// Complementary error function for x >= 2 via the Laplace continued fraction
//   erfc(x) = e^{-x^2}/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
// evaluated with the modified Lentz algorithm.
inline double erfc_continued_fraction(double x) {
    constexpr double one_over_sqrt_pi = 0.5641895835477562869480794516;
    constexpr double tiny = 1e-300;
    double f = x;
    double c = x;
    double d = 0.0;
    for (int n = 1; n < 300; ++n) {
        const double a = n / 2.0;  // coefficients 1/2, 1, 3/2, 2, ...
        d = x + a * d;
        if (d == 0.0) d = tiny;
        c = x + a / c;
        if (c == 0.0) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-17) break;
    }
    return one_over_sqrt_pi * std::exp(-x * x) / f;
}

}  // namespace detail

/// Gauss error function, accurate to ~1e-15 on [-6, 6].
/// Odd symmetry erf(-x) = -erf(x) holds exactly by construction.
inline double erf(double x) {
    const double ax = std::abs(x);
    double r;
    if (ax <= 2.0) {
        r = detail::erf_series(ax);
    } else if (ax < 27.0) {
        r = 1.0 - detail::erfc_continued_fraction(ax);
    } else {
        r = 1.0;  // erfc underflows to 0 well before 27
    }
    return std::signbit(x) ? -r : r;
}

/// Inverse error function on (-1, 1).
/// Newton iteration on erf with a bisection safeguard; |erf(erf_inv(p)) - p|
/// stays below 1e-15 across the domain.
inline double erf_inv(double p) {
    if (!(std::abs(p) < 1.0)) {
        throw OutOfDomain("erf_inv requires |p| < 1");
    }
    if (p == 0.0) return 0.0;

    const double ap = std::abs(p);
    // Bracket the root for |p|: erf is strictly increasing, erf(6) > 1 - 3e-17.
    double lo = 0.0, hi = 6.0;
    // Starting point from the classic tail/central split.
    double t;
    if (ap < 0.9) {
        constexpr double sqrt_pi_over_2 = 0.8862269254527580136490837416;
        t = sqrt_pi_over_2 * ap;  // leading series term
    } else {
        const double u = -std::log((1.0 - ap) * (1.0 + ap));
        t = std::sqrt(u - 0.5 * std::log(u));
    }

    constexpr double two_over_sqrt_pi = 1.1283791670955125738961589031;
    for (int it = 0; it < 60; ++it) {
        const double f = erf(t) - ap;
        if (f > 0.0) {
            hi = t;
        } else if (f < 0.0) {
            lo = t;
        } else {
            break;
        }
        const double deriv = two_over_sqrt_pi * std::exp(-t * t);
        double step = f / deriv;
        double next = t - step;
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);  // safeguard: fall back to bisection
        }
        if (std::abs(next - t) <= 1e-17 * std::abs(next)) {
            t = next;
            break;
        }
        t = next;
    }
    return std::signbit(p) ? -t : t;
}

}  // namespace ccfolio
