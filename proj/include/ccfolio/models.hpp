#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ccfolio/distributions.hpp"
#include "ccfolio/errors.hpp"
#include "ccfolio/simplex.hpp"
#include "ccfolio/special_functions.hpp"
#include "ccfolio/stats.hpp"

namespace ccfolio {

/// Weight below which an asset's perturbation contribution is treated as the
/// exact-zero distributional limit and dropped from the exponential sum.
inline constexpr double kZeroWeightThreshold = 1e-9;

struct NormalPerturbation {
    Eigen::VectorXd means;
    Eigen::VectorXd stddevs;
};

struct ExponentialPerturbation {
    Eigen::VectorXd rates;
};

/// Per-asset basic shift magnitudes (the diagonal entries of the shift
/// vectors) plus the perturbation distribution.
struct PerturbationSpec {
    Eigen::VectorXd shifts;
    std::variant<NormalPerturbation, ExponentialPerturbation> distribution;

    bool is_normal() const { return std::holds_alternative<NormalPerturbation>(distribution); }
    const NormalPerturbation& normal() const { return std::get<NormalPerturbation>(distribution); }
    const ExponentialPerturbation& exponential() const {
        return std::get<ExponentialPerturbation>(distribution);
    }
};

struct NominalVariant {};

struct RobustNormalVariant {
    PerturbationSpec spec;
    double beta;
};

struct RobustExponentialVariant {
    PerturbationSpec spec;
    double beta;
};

using ModelVariant = std::variant<NominalVariant, RobustNormalVariant, RobustExponentialVariant>;

/// One of the three portfolio problems: minimize (1/2) x' Sigma x over the
/// simplex subject to the variant's return constraint at target tau.
struct PortfolioModel {
    ReturnStatistics stats;
    double tau = 0.0;
    ModelVariant variant;

    Eigen::Index size() const { return stats.size(); }

    bool is_nominal() const { return std::holds_alternative<NominalVariant>(variant); }
    bool is_robust_normal() const { return std::holds_alternative<RobustNormalVariant>(variant); }
    bool is_robust_exponential() const {
        return std::holds_alternative<RobustExponentialVariant>(variant);
    }

    double beta() const {
        if (const auto* rn = std::get_if<RobustNormalVariant>(&variant)) return rn->beta;
        if (const auto* re = std::get_if<RobustExponentialVariant>(&variant)) return re->beta;
        throw InvalidModel("nominal model has no beta");
    }

    const PerturbationSpec& perturbation() const {
        if (const auto* rn = std::get_if<RobustNormalVariant>(&variant)) return rn->spec;
        if (const auto* re = std::get_if<RobustExponentialVariant>(&variant)) return re->spec;
        throw InvalidModel("nominal model has no perturbation spec");
    }
};

inline std::string variant_tag(const PortfolioModel& model) {
    if (model.is_nominal()) return "nominal";
    if (model.is_robust_normal()) return "robust_normal";
    return "robust_exponential";
}

namespace detail {

inline void validate_spec(const PerturbationSpec& spec, Eigen::Index n, bool want_normal) {
    if (spec.shifts.size() != n) {
        throw DimensionMismatch("shift vector length does not match asset count");
    }
    if ((spec.shifts.array() < 0.0).any()) {
        throw InvalidModel("basic shifts must be nonnegative");
    }
    if (want_normal != spec.is_normal()) {
        throw InvalidModel("perturbation distribution does not match the variant tag");
    }
    if (spec.is_normal()) {
        const auto& d = spec.normal();
        if (d.means.size() != n || d.stddevs.size() != n) {
            throw DimensionMismatch("normal perturbation parameter lengths");
        }
        if ((d.stddevs.array() <= 0.0).any()) {
            throw InvalidModel("normal perturbation stddevs must be positive");
        }
    } else {
        const auto& d = spec.exponential();
        if (d.rates.size() != n) {
            throw DimensionMismatch("exponential perturbation parameter length");
        }
        if ((d.rates.array() <= 0.0).any()) {
            throw InvalidModel("exponential perturbation rates must be positive");
        }
    }
}

inline void check_beta(double beta) {
    if (!(beta > 0.0 && beta < 1.0)) {
        throw InvalidModel("beta must lie in (0, 1)");
    }
}

}  // namespace detail

inline PortfolioModel nominal_model(ReturnStatistics stats, double tau) {
    return PortfolioModel{std::move(stats), tau, NominalVariant{}};
}

inline PortfolioModel robust_normal_model(ReturnStatistics stats, double tau,
                                          PerturbationSpec spec, double beta) {
    detail::check_beta(beta);
    detail::validate_spec(spec, stats.size(), /*want_normal=*/true);
    return PortfolioModel{std::move(stats), tau, RobustNormalVariant{std::move(spec), beta}};
}

inline PortfolioModel robust_exponential_model(ReturnStatistics stats, double tau,
                                               PerturbationSpec spec, double beta) {
    detail::check_beta(beta);
    detail::validate_spec(spec, stats.size(), /*want_normal=*/false);
    return PortfolioModel{std::move(stats), tau, RobustExponentialVariant{std::move(spec), beta}};
}

inline PortfolioModel with_tau(PortfolioModel model, double tau) {
    model.tau = tau;
    return model;
}

namespace detail {

inline void check_weights(const PortfolioModel& model, const Eigen::VectorXd& x) {
    if (x.size() != model.size()) {
        throw DimensionMismatch("weight vector length does not match asset count");
    }
}

}  // namespace detail

/// Portfolio risk (1/2) x' Sigma x.
inline double objective(const PortfolioModel& model, const Eigen::VectorXd& x) {
    detail::check_weights(model, x);
    return 0.5 * x.dot(model.stats.sigma * x);
}

/// Gradient Sigma x of the objective.
inline Eigen::VectorXd objective_gradient(const PortfolioModel& model, const Eigen::VectorXd& x) {
    detail::check_weights(model, x);
    return model.stats.sigma * x;
}

/// Spectral norm of Sigma; bounds the objective gradient on the simplex.
inline double objective_lipschitz_bound(const PortfolioModel& model) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.stats.sigma,
                                                      Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// sqrt(2) * erf_inv(1 - 2 beta): the cone-term multiplier of the normal
/// robust counterpart (negative for beta > 1/2). Memoized per thread since
/// slack evaluations hit the same beta millions of times.
inline double normal_cone_multiplier(double beta) {
    thread_local double cached_beta = std::numeric_limits<double>::quiet_NaN();
    thread_local double cached_value = 0.0;
    if (beta != cached_beta) {
        cached_value = std::sqrt(2.0) * erf_inv(1.0 - 2.0 * beta);
        cached_beta = beta;
    }
    return cached_value;
}

/// Slack of the variant's return constraint at x; >= 0 means feasible.
///   Nominal:     mu0'x - tau
///   Normal:      mu0'x + sum shift_j m_j x_j
///                + sqrt(2) erf_inv(1-2beta) ||diag(s . shift) x|| - tau
///   Exponential: (1 - beta) - F_Y(tau - mu0'x), with F the CDF of
///                Y = sum shift_j x_j zeta_j over assets whose weighted shift
///                exceeds the zero threshold. A nonpositive CDF argument
///                gives slack 1 - beta exactly; if every asset is dropped
///                while the argument is positive the mass sits at 0 and the
///                slack is -beta.
inline double constraint_slack(const PortfolioModel& model, const Eigen::VectorXd& x) {
    detail::check_weights(model, x);
    const double nominal_return = model.stats.mu0.dot(x);

    if (model.is_nominal()) {
        return nominal_return - model.tau;
    }

    if (model.is_robust_normal()) {
        const auto& variant = std::get<RobustNormalVariant>(model.variant);
        const auto& spec = variant.spec;
        const auto& dist = spec.normal();
        const Eigen::ArrayXd weighted_shift = spec.shifts.array() * x.array();
        const double mean_term = (weighted_shift * dist.means.array()).sum();
        const double cone = std::sqrt((dist.stddevs.array() * weighted_shift).square().sum());
        return nominal_return + mean_term + normal_cone_multiplier(variant.beta) * cone -
               model.tau;
    }

    const auto& variant = std::get<RobustExponentialVariant>(model.variant);
    const double a = model.tau - nominal_return;
    if (a <= 0.0) {
        return 1.0 - variant.beta;
    }
    const auto& spec = variant.spec;
    const auto& rates = spec.exponential().rates;
    std::vector<double> kept_coeffs, kept_rates;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double c = spec.shifts[j] * x[j];
        if (c >= kZeroWeightThreshold) {
            kept_coeffs.push_back(c);
            kept_rates.push_back(rates[j]);
        }
    }
    if (kept_coeffs.empty()) {
        return -variant.beta;  // point mass at 0, CDF(a) = 1 for a > 0
    }
    const auto k = static_cast<Eigen::Index>(kept_coeffs.size());
    WeightedExponentialSum sum(Eigen::Map<Eigen::VectorXd>(kept_coeffs.data(), k),
                               Eigen::Map<Eigen::VectorXd>(kept_rates.data(), k));
    return (1.0 - variant.beta) - hypoexp_cdf(sum, a);
}

namespace detail {

/// The variant's return-side expression R(x): feasibility is R(x) >= tau.
inline double return_side(const PortfolioModel& model, const Eigen::VectorXd& x) {
    PortfolioModel probe = model;
    probe.tau = 0.0;
    if (model.is_robust_exponential()) {
        // For the exponential variant, slack is not affine in tau; recover
        // R(x) = mu0'x + quantile_{1-beta}(Y) instead.
        const auto& variant = std::get<RobustExponentialVariant>(model.variant);
        const auto& spec = variant.spec;
        const auto& rates = spec.exponential().rates;
        std::vector<double> kept_coeffs, kept_rates;
        for (Eigen::Index j = 0; j < x.size(); ++j) {
            const double c = spec.shifts[j] * x[j];
            if (c >= kZeroWeightThreshold) {
                kept_coeffs.push_back(c);
                kept_rates.push_back(rates[j]);
            }
        }
        const double base = model.stats.mu0.dot(x);
        if (kept_coeffs.empty()) return base;
        const auto k = static_cast<Eigen::Index>(kept_coeffs.size());
        WeightedExponentialSum sum(Eigen::Map<Eigen::VectorXd>(kept_coeffs.data(), k),
                                   Eigen::Map<Eigen::VectorXd>(kept_rates.data(), k));
        return base + hypoexp_quantile(sum, 1.0 - variant.beta);
    }
    return constraint_slack(probe, x);
}

/// Projected-gradient ascent of return_side over the simplex with central
/// finite-difference gradients; good enough for the approximate tau range.
inline double maximize_return_side(const PortfolioModel& model, Eigen::VectorXd x) {
    constexpr double h = 1e-6;
    double value = return_side(model, x);
    const Eigen::Index n = x.size();
    double step = 1.0;
    for (int it = 0; it < 500; ++it) {
        Eigen::VectorXd grad(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            Eigen::VectorXd xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            grad[j] = (return_side(model, xp) - return_side(model, xm)) / (2.0 * h);
        }
        bool improved = false;
        for (int bt = 0; bt < 40; ++bt) {
            const Eigen::VectorXd candidate = project_to_simplex(x + step * grad);
            const double cv = return_side(model, candidate);
            if (cv > value + 1e-14) {
                x = candidate;
                value = cv;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) break;
        step = std::min(step * 2.0, 1e3);
    }
    return value;
}

}  // namespace detail

/// Approximate attainable range of tau for the model's return constraint.
/// Exact for the nominal variant (linear over the simplex); for robust
/// variants the maximum is computed by projected-gradient ascent of the
/// return-side expression from each vertex and the centroid.
inline std::pair<double, double> feasible_return_range(const PortfolioModel& model) {
    const Eigen::Index n = model.size();
    if (model.is_nominal()) {
        return {model.stats.mu0.minCoeff(), model.stats.mu0.maxCoeff()};
    }
    double tau_min = std::numeric_limits<double>::infinity();
    double tau_max = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::VectorXd vertex = Eigen::VectorXd::Zero(n);
        vertex[j] = 1.0;
        const double rv = detail::return_side(model, vertex);
        tau_min = std::min(tau_min, rv);
        tau_max = std::max(tau_max, detail::maximize_return_side(model, vertex));
    }
    const Eigen::VectorXd centroid = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    tau_max = std::max(tau_max, detail::maximize_return_side(model, centroid));
    return {tau_min, tau_max};
}

// ---------------------------------------------------------------------------
// JSON schema:
//   {stats: {labels, mu0, sigma}, tau, variant, beta?, shifts?, dist_params?}
// with variant one of "nominal" | "robust_normal" | "robust_exponential" and
// dist_params {means, stddevs} or {rates}.
// ---------------------------------------------------------------------------

inline nlohmann::json model_to_json(const PortfolioModel& model) {
    nlohmann::json j;
    nlohmann::json stats;
    stats["labels"] = model.stats.asset_labels;
    stats["mu0"] = std::vector<double>(model.stats.mu0.data(),
                                       model.stats.mu0.data() + model.stats.mu0.size());
    std::vector<std::vector<double>> sigma;
    for (Eigen::Index i = 0; i < model.stats.sigma.rows(); ++i) {
        sigma.emplace_back(model.stats.sigma.row(i).begin(), model.stats.sigma.row(i).end());
    }
    stats["sigma"] = sigma;
    j["stats"] = stats;
    j["tau"] = model.tau;
    j["variant"] = variant_tag(model);
    if (!model.is_nominal()) {
        const auto& spec = model.perturbation();
        j["beta"] = model.beta();
        j["shifts"] = std::vector<double>(spec.shifts.data(),
                                          spec.shifts.data() + spec.shifts.size());
        nlohmann::json dist;
        if (spec.is_normal()) {
            const auto& d = spec.normal();
            dist["means"] = std::vector<double>(d.means.data(), d.means.data() + d.means.size());
            dist["stddevs"] =
                std::vector<double>(d.stddevs.data(), d.stddevs.data() + d.stddevs.size());
        } else {
            const auto& d = spec.exponential();
            dist["rates"] = std::vector<double>(d.rates.data(), d.rates.data() + d.rates.size());
        }
        j["dist_params"] = dist;
    }
    return j;
}

namespace detail {

inline Eigen::VectorXd vector_from_json(const nlohmann::json& j, const std::string& key) {
    const auto v = j.at(key).get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace detail

inline PortfolioModel model_from_json(const nlohmann::json& j) {
    ReturnStatistics stats = statistics_from_json(j.at("stats"));
    const double tau = j.value("tau", 0.0);
    const std::string tag = j.at("variant").get<std::string>();
    if (tag == "nominal") {
        return nominal_model(std::move(stats), tau);
    }
    if (tag != "robust_normal" && tag != "robust_exponential") {
        throw InvalidModel("unknown variant '" + tag + "'");
    }
    if (!j.contains("beta") || !j.contains("shifts") || !j.contains("dist_params")) {
        throw InvalidModel("robust variants require beta, shifts and dist_params");
    }
    PerturbationSpec spec;
    spec.shifts = detail::vector_from_json(j, "shifts");
    const auto& dp = j.at("dist_params");
    if (tag == "robust_normal") {
        NormalPerturbation d;
        d.means = detail::vector_from_json(dp, "means");
        d.stddevs = detail::vector_from_json(dp, "stddevs");
        spec.distribution = std::move(d);
        return robust_normal_model(std::move(stats), tau, std::move(spec),
                                   j.at("beta").get<double>());
    }
    ExponentialPerturbation d;
    d.rates = detail::vector_from_json(dp, "rates");
    spec.distribution = std::move(d);
    return robust_exponential_model(std::move(stats), tau, std::move(spec),
                                    j.at("beta").get<double>());
}

}  // namespace ccfolio
