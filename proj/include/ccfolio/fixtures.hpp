#pragma once

#include <Eigen/Dense>

#include "ccfolio/models.hpp"
#include "ccfolio/stats.hpp"

namespace ccfolio {
namespace fixtures {

/// Quarterly return statistics of the three bundled Indian sector indices
/// (percent and percent^2), estimated from 20 quarters of closes.
inline ReturnStatistics nifty_sector_statistics() {
    ReturnStatistics stats;
    stats.asset_labels = {"NIFTY_BANK", "NIFTY_INFRA", "NIFTY_IT"};
    stats.mu0 = Eigen::Vector3d(2.609, -1.430, 6.329);
    stats.sigma.resize(3, 3);
    stats.sigma << 24.126, -1.460, 11.032,
                   -1.460,  8.237,  0.461,
                   11.032,  0.461, 18.034;
    stats.periods = 20;
    return stats;
}

/// Basic shift magnitudes used by the bundled robust models.
inline Eigen::VectorXd nifty_basic_shifts() {
    return Eigen::Vector3d(0.2, 0.1, 0.3);
}

inline PortfolioModel nifty_nominal_model(double tau) {
    return nominal_model(nifty_sector_statistics(), tau);
}

/// Robust counterpart with standard normal perturbations (zero mean, unit
/// stddev) on the basic shifts.
inline PortfolioModel nifty_robust_normal_model(double tau, double beta = 0.95) {
    PerturbationSpec spec;
    spec.shifts = nifty_basic_shifts();
    spec.distribution = NormalPerturbation{Eigen::Vector3d::Zero(), Eigen::Vector3d::Ones()};
    return robust_normal_model(nifty_sector_statistics(), tau, std::move(spec), beta);
}

/// Robust counterpart with unit-rate exponential perturbations on the basic
/// shifts.
inline PortfolioModel nifty_robust_exponential_model(double tau, double beta = 0.95) {
    PerturbationSpec spec;
    spec.shifts = nifty_basic_shifts();
    spec.distribution = ExponentialPerturbation{Eigen::Vector3d::Ones()};
    return robust_exponential_model(nifty_sector_statistics(), tau, std::move(spec), beta);
}

}  // namespace fixtures
}  // namespace ccfolio
