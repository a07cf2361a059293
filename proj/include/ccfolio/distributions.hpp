#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "ccfolio/errors.hpp"

namespace ccfolio {

/// Y = sum_j c_j * zeta_j with zeta_j ~ Normal(m_j, s_j), independent.
struct WeightedNormalSum {
    Eigen::VectorXd coefficients;
    Eigen::VectorXd means;
    Eigen::VectorXd stddevs;
};

inline void validate(const WeightedNormalSum& sum) {
    if (sum.coefficients.size() != sum.means.size() ||
        sum.coefficients.size() != sum.stddevs.size()) {
        throw DimensionMismatch("weighted normal sum fields differ in length");
    }
    if ((sum.stddevs.array() <= 0.0).any()) {
        throw OutOfDomain("weighted normal sum requires all stddevs > 0");
    }
}

/// Mean and standard deviation of Y:
///   m = sum c_j m_j,   s = sqrt(sum (c_j s_j)^2).
inline std::pair<double, double> weighted_normal_params(const WeightedNormalSum& sum) {
    validate(sum);
    const double m = sum.coefficients.dot(sum.means);
    const double s = (sum.coefficients.array() * sum.stddevs.array()).matrix().norm();
    return {m, s};
}

/// Y = sum_j c_j * zeta_j with zeta_j ~ Exponential(rate lambda_j),
/// independent, all c_j > 0. The closed-form density below requires the
/// effective ratios lambda_j / c_j to be pairwise distinct; near-degenerate
/// coefficient sets are nudged deterministically at construction.
class WeightedExponentialSum {
public:
    WeightedExponentialSum(Eigen::VectorXd coefficients, Eigen::VectorXd rates)
        : c_(std::move(coefficients)), rates_(std::move(rates)) {
        if (c_.size() != rates_.size()) {
            throw DimensionMismatch("coefficients and rates differ in length");
        }
        if (c_.size() < 1) {
            throw DimensionMismatch("weighted exponential sum needs at least one term");
        }
        if ((c_.array() <= 0.0).any()) {
            throw OutOfDomain("weighted exponential sum requires all coefficients > 0");
        }
        if ((rates_.array() <= 0.0).any()) {
            throw OutOfDomain("weighted exponential sum requires all rates > 0");
        }
        if (degenerate()) {
            for (Eigen::Index k = 0; k < c_.size(); ++k) {
                c_[k] *= 1.0 + static_cast<double>(k + 1) * 1e-7;
            }
            if (degenerate()) {
                throw DegenerateCoefficients("ratios still coincide after nudge");
            }
        }
    }

    const Eigen::VectorXd& coefficients() const { return c_; }
    const Eigen::VectorXd& rates() const { return rates_; }
    Eigen::Index size() const { return c_.size(); }

private:
    bool degenerate() const {
        for (Eigen::Index i = 0; i < c_.size(); ++i) {
            for (Eigen::Index j = i + 1; j < c_.size(); ++j) {
                const double a = c_[i] * rates_[j], b = c_[j] * rates_[i];
                if (std::abs(a - b) < 1e-9 * std::max(std::abs(a), std::abs(b))) {
                    return true;
                }
            }
        }
        return false;
    }

    Eigen::VectorXd c_;
    Eigen::VectorXd rates_;
};

namespace detail {

// Product over l != k of (c_k lam_l - c_l lam_k).
inline double partial_fraction_denominator(const WeightedExponentialSum& sum, Eigen::Index k) {
    const auto& c = sum.coefficients();
    const auto& lam = sum.rates();
    double prod = 1.0;
    for (Eigen::Index l = 0; l < sum.size(); ++l) {
        if (l != k) prod *= c[k] * lam[l] - c[l] * lam[k];
    }
    return prod;
}

}  // namespace detail

/// Density of Y at y; zero for y <= 0. For a single term this reduces to the
/// scaled exponential (lambda/c) e^{-lambda y / c}.
inline double hypoexp_pdf(const WeightedExponentialSum& sum, double y) {
    if (y <= 0.0) return 0.0;
    const auto& c = sum.coefficients();
    const auto& lam = sum.rates();
    const Eigen::Index K = sum.size();
    double rate_product = 1.0;
    for (Eigen::Index j = 0; j < K; ++j) rate_product *= lam[j];
    double acc = 0.0;
    for (Eigen::Index k = 0; k < K; ++k) {
        const double denom = detail::partial_fraction_denominator(sum, k);
        acc += std::pow(c[k], static_cast<double>(K - 2)) * std::exp(-lam[k] * y / c[k]) / denom;
    }
    const double g = rate_product * acc;
    return std::max(g, 0.0);
}

/// CDF of Y at a; zero for a <= 0, monotone, limits to 1. Values are clamped
/// to [0, 1]; raw results further than 1e-6 outside that band indicate
/// catastrophic cancellation and raise DegenerateCoefficients.
inline double hypoexp_cdf(const WeightedExponentialSum& sum, double a) {
    if (a <= 0.0) return 0.0;
    const auto& c = sum.coefficients();
    const auto& lam = sum.rates();
    const Eigen::Index K = sum.size();
    double rate_product = 1.0;
    for (Eigen::Index j = 0; j < K; ++j) rate_product *= lam[j];
    double acc = 0.0;
    for (Eigen::Index k = 0; k < K; ++k) {
        const double denom = -lam[k] * detail::partial_fraction_denominator(sum, k);
        acc += std::pow(c[k], static_cast<double>(K - 1)) *
               (std::exp(-lam[k] * a / c[k]) - 1.0) / denom;
    }
    const double raw = rate_product * acc;
    constexpr double band = 1e-6;
    if (raw < -band || raw > 1.0 + band) {
        throw DegenerateCoefficients("cdf value " + std::to_string(raw) +
                                     " outside the clamping band");
    }
    return std::clamp(raw, 0.0, 1.0);
}

/// Smallest a with CDF(a) >= p, found by bracketing and bisection.
inline double hypoexp_quantile(const WeightedExponentialSum& sum, double p) {
    if (!(p >= 0.0 && p < 1.0)) {
        throw OutOfDomain("hypoexp_quantile requires p in [0, 1)");
    }
    if (p == 0.0) return 0.0;
    double hi = (sum.coefficients().array() / sum.rates().array()).sum();  // the mean
    while (hypoexp_cdf(sum, hi) < p) {
        hi *= 2.0;
        if (hi > 1e9) throw OutOfDomain("hypoexp_quantile bracket blew up");
    }
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (hypoexp_cdf(sum, mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace ccfolio
