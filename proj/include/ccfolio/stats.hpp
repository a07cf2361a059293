#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include <json.hpp>

#include "ccfolio/errors.hpp"
#include "ccfolio/prices.hpp"

namespace ccfolio {

/// Per-period percentage returns, T rows x n assets.
struct ReturnMatrix {
    Eigen::MatrixXd returns;
    std::vector<std::string> asset_labels;
};

/// Expected returns (percent) and covariance of returns (percent^2),
/// estimated with the population divisor T.
struct ReturnStatistics {
    Eigen::VectorXd mu0;
    Eigen::MatrixXd sigma;
    std::vector<std::string> asset_labels;
    int periods = 0;  // T

    Eigen::Index size() const { return mu0.size(); }
};

/// Simple percentage returns: r_t = 100 * (P_t - P_{t-1}) / P_{t-1}.
inline ReturnMatrix compute_returns(const PriceSeries& prices) {
    const Eigen::Index rows = prices.prices.rows();
    const Eigen::Index n = prices.prices.cols();
    ReturnMatrix rm;
    rm.asset_labels = prices.asset_labels;
    rm.returns.resize(rows - 1, n);
    for (Eigen::Index t = 1; t < rows; ++t) {
        rm.returns.row(t - 1) =
            100.0 * (prices.prices.row(t) - prices.prices.row(t - 1)).cwiseQuotient(
                        prices.prices.row(t - 1));
    }
    return rm;
}

/// Mean vector and covariance matrix with divisor T (population form).
/// The result is symmetric by construction.
inline ReturnStatistics estimate_statistics(const ReturnMatrix& returns) {
    const Eigen::Index T = returns.returns.rows();
    const Eigen::Index n = returns.returns.cols();
    if (T < 1 || n < 1) {
        throw EmptyReturns("need at least one return period and one asset");
    }
    ReturnStatistics stats;
    stats.asset_labels = returns.asset_labels;
    stats.periods = static_cast<int>(T);
    stats.mu0 = returns.returns.colwise().mean();
    const Eigen::MatrixXd centered = returns.returns.rowwise() - stats.mu0.transpose();
    Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(T);
    stats.sigma = 0.5 * (cov + cov.transpose());  // exact symmetry
    return stats;
}

inline nlohmann::json statistics_to_json(const ReturnStatistics& stats) {
    nlohmann::json j;
    j["labels"] = stats.asset_labels;
    j["mu0"] = std::vector<double>(stats.mu0.data(), stats.mu0.data() + stats.mu0.size());
    std::vector<std::vector<double>> sigma;
    for (Eigen::Index i = 0; i < stats.sigma.rows(); ++i) {
        sigma.emplace_back(stats.sigma.row(i).begin(), stats.sigma.row(i).end());
    }
    j["sigma"] = sigma;
    j["T"] = stats.periods;
    return j;
}

inline ReturnStatistics statistics_from_json(const nlohmann::json& j) {
    ReturnStatistics stats;
    stats.asset_labels = j.at("labels").get<std::vector<std::string>>();
    const auto mu = j.at("mu0").get<std::vector<double>>();
    const auto sig = j.at("sigma").get<std::vector<std::vector<double>>>();
    const auto n = stats.asset_labels.size();
    if (mu.size() != n || sig.size() != n) {
        throw DimensionMismatch("statistics JSON fields disagree on asset count");
    }
    stats.mu0 = Eigen::Map<const Eigen::VectorXd>(mu.data(), static_cast<Eigen::Index>(n));
    stats.sigma.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (sig[i].size() != n) {
            throw DimensionMismatch("sigma row " + std::to_string(i) + " has wrong length");
        }
        for (std::size_t k = 0; k < n; ++k) {
            stats.sigma(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = sig[i][k];
        }
    }
    stats.periods = j.value("T", 0);
    return stats;
}

}  // namespace ccfolio
