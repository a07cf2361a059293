#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "ccfolio/errors.hpp"
#include "ccfolio/models.hpp"
#include "ccfolio/random.hpp"
#include "ccfolio/simplex.hpp"

namespace ccfolio {

struct SolverConfig {
    double tolerance = 1e-8;        // step-norm / KKT threshold
    int max_iterations = 10000;     // total inner iteration budget per start
    int multistart_count = 16;      // starts for nonconvex variants
    std::uint64_t rng_seed = 42;
    double penalty_growth = 10.0;   // escalation factor for the AL penalty
    double grid_step = 1e-3;        // default oracle resolution
};

inline void validate_config(const SolverConfig& config) {
    if (!(config.tolerance > 0.0)) throw ConfigInvalid("tolerance must be positive");
    if (config.max_iterations < 1) throw ConfigInvalid("max_iterations must be >= 1");
    if (config.multistart_count < 1) throw ConfigInvalid("multistart_count must be >= 1");
    if (!(config.penalty_growth > 1.0)) throw ConfigInvalid("penalty_growth must exceed 1");
    if (!(config.grid_step > 0.0 && config.grid_step < 1.0)) {
        throw ConfigInvalid("grid_step must lie in (0, 1)");
    }
}

enum class SolveStatus { Converged, Infeasible, NotConverged };

inline std::string to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::Converged: return "converged";
        case SolveStatus::Infeasible: return "infeasible";
        default: return "not_converged";
    }
}

inline SolveStatus solve_status_from_string(const std::string& s) {
    if (s == "converged") return SolveStatus::Converged;
    if (s == "infeasible") return SolveStatus::Infeasible;
    if (s == "not_converged") return SolveStatus::NotConverged;
    throw Error("unknown solve status '" + s + "'");
}

struct Solution {
    Eigen::VectorXd weights;
    double risk = std::numeric_limits<double>::quiet_NaN();
    SolveStatus status = SolveStatus::NotConverged;
    double return_slack = std::numeric_limits<double>::quiet_NaN();
    int starts_used = 0;
    int best_start_index = -1;
};

namespace detail {

constexpr double kFeasibilityTolerance = 1e-6;   // slack >= -this counts as feasible
constexpr double kViolationTarget = 1e-9;        // AL drives violations below this

/// Gradient of the return-constraint slack. Analytic for the nominal and
/// normal variants; central finite differences (step 1e-6) for the
/// exponential one, whose closed-form derivative is fragile near
/// degeneracies.
inline Eigen::VectorXd slack_gradient(const PortfolioModel& model, const Eigen::VectorXd& x) {
    const Eigen::Index n = x.size();
    if (model.is_nominal()) {
        return model.stats.mu0;
    }
    if (model.is_robust_normal()) {
        const auto& variant = std::get<RobustNormalVariant>(model.variant);
        const auto& spec = variant.spec;
        const auto& dist = spec.normal();
        Eigen::VectorXd grad =
            model.stats.mu0 + (spec.shifts.array() * dist.means.array()).matrix();
        const Eigen::ArrayXd scaled =
            dist.stddevs.array() * spec.shifts.array() * x.array();
        const double norm = std::sqrt(scaled.square().sum());
        if (norm > 1e-14) {
            grad += normal_cone_multiplier(variant.beta) / norm *
                    (scaled * dist.stddevs.array() * spec.shifts.array()).matrix();
        }
        return grad;
    }
    constexpr double h = 1e-6;
    Eigen::VectorXd grad(n);
    Eigen::VectorXd probe = x;
    for (Eigen::Index j = 0; j < n; ++j) {
        probe[j] = x[j] + h;
        const double up = constraint_slack(model, probe);
        probe[j] = x[j] - h;
        const double down = constraint_slack(model, probe);
        probe[j] = x[j];
        grad[j] = (up - down) / (2.0 * h);
    }
    return grad;
}

struct AugmentedLagrangianRun {
    Eigen::VectorXd x;
    double risk = std::numeric_limits<double>::quiet_NaN();
    double slack = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;
};

/// Rockafellar augmented Lagrangian for the single inequality slack(x) >= 0
/// with projected-gradient inner iterations and Armijo backtracking; the
/// simplex constraints are handled exactly by the projection.
inline AugmentedLagrangianRun augmented_lagrangian(const PortfolioModel& model,
                                                   const Eigen::VectorXd& start,
                                                   const SolverConfig& config) {
    Eigen::VectorXd x = project_to_simplex(start);
    double multiplier = 0.0;
    double penalty = 10.0;
    int budget = config.max_iterations;
    double previous_violation = std::numeric_limits<double>::infinity();
    bool inner_converged = false;

    const auto phi = [&](const Eigen::VectorXd& p) {
        const double shifted = std::max(0.0, multiplier / penalty - constraint_slack(model, p));
        return objective(model, p) + 0.5 * penalty * shifted * shifted;
    };
    const auto phi_gradient = [&](const Eigen::VectorXd& p) {
        Eigen::VectorXd grad = objective_gradient(model, p);
        const double shifted = std::max(0.0, multiplier / penalty - constraint_slack(model, p));
        if (shifted > 0.0) {
            grad -= penalty * shifted * slack_gradient(model, p);
        }
        return grad;
    };

    for (int outer = 0; outer < 50 && budget > 0; ++outer) {
        // Inner projected-gradient descent on the AL merit function.
        double step = 1.0;
        inner_converged = false;
        while (budget-- > 0) {
            const double value = phi(x);
            const Eigen::VectorXd grad = phi_gradient(x);
            step = std::min(step * 2.0, 1e6);
            Eigen::VectorXd next = x;
            bool moved = false;
            for (int bt = 0; bt < 60; ++bt) {
                Eigen::VectorXd candidate = project_to_simplex(x - step * grad);
                const Eigen::VectorXd direction = candidate - x;
                const double directional = grad.dot(direction);
                if (phi(candidate) <= value + 1e-4 * directional) {
                    next = std::move(candidate);
                    moved = true;
                    break;
                }
                step *= 0.5;
                if (step < 1e-18) break;
            }
            if (!moved) {
                inner_converged = true;  // no descent direction left
                break;
            }
            const double move = (next - x).norm();
            x = std::move(next);
            if (move <= config.tolerance * (1.0 + x.norm())) {
                inner_converged = true;
                break;
            }
        }

        const double slack = constraint_slack(model, x);
        const double violation = std::max(0.0, -slack);
        const double updated = std::max(0.0, multiplier - penalty * slack);
        const double multiplier_change = std::abs(updated - multiplier);
        multiplier = updated;

        if (inner_converged && violation <= kViolationTarget &&
            multiplier_change <= 1e-7 * (1.0 + multiplier)) {
            AugmentedLagrangianRun run;
            run.x = x;
            run.risk = objective(model, x);
            run.slack = slack;
            run.converged = true;
            return run;
        }
        if (violation > 0.25 * previous_violation && violation > kViolationTarget) {
            penalty = std::min(penalty * config.penalty_growth, 1e12);
        }
        previous_violation = violation;
    }

    AugmentedLagrangianRun run;
    run.x = x;
    run.risk = objective(model, x);
    run.slack = constraint_slack(model, x);
    run.converged = false;
    return run;
}

inline std::vector<Eigen::VectorXd> deterministic_starts(const PortfolioModel& model,
                                                         const SolverConfig& config) {
    const Eigen::Index n = model.size();
    std::vector<Eigen::VectorXd> starts;
    const Eigen::VectorXd centroid =
        Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));

    const bool needs_multistart =
        model.is_robust_exponential() || (model.is_robust_normal() && model.beta() < 0.5);
    if (!needs_multistart) {
        // Convex feasible set: any start reaches the global optimum.
        starts.push_back(centroid);
        Eigen::Index best_vertex = 0;
        model.stats.mu0.maxCoeff(&best_vertex);
        Eigen::VectorXd vertex = Eigen::VectorXd::Zero(n);
        vertex[best_vertex] = 1.0;
        starts.push_back(vertex);
        return starts;
    }

    // Warm start at the nominal optimum, then centroid, vertices and seeded
    // random simplex points up to multistart_count.
    const PortfolioModel nominal = nominal_model(model.stats, model.tau);
    starts.push_back(augmented_lagrangian(nominal, centroid, config).x);
    starts.push_back(centroid);
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::VectorXd vertex = Eigen::VectorXd::Zero(n);
        vertex[j] = 1.0;
        starts.push_back(vertex);
    }
    DeterministicSampler sampler(config.rng_seed);
    while (static_cast<int>(starts.size()) < config.multistart_count) {
        Eigen::VectorXd point(n);
        for (Eigen::Index j = 0; j < n; ++j) point[j] = sampler.exponential(1.0);
        starts.push_back(point / point.sum());  // Dirichlet(1, ..., 1)
    }
    if (static_cast<int>(starts.size()) > config.multistart_count) {
        starts.resize(static_cast<std::size_t>(config.multistart_count));
    }
    return starts;
}

inline Solution infeasible_solution(Eigen::Index n, int starts_used) {
    Solution sol;
    sol.weights = Eigen::VectorXd::Zero(n);
    sol.status = SolveStatus::Infeasible;
    sol.starts_used = starts_used;
    return sol;
}

}  // namespace detail

/// Minimizes the model's risk over the simplex subject to its return
/// constraint. Convex variants reach the global optimum from any start;
/// the exponential variant takes the best of the deterministic multistart
/// set. Infeasible targets yield status Infeasible, not an exception.
inline Solution solve(const PortfolioModel& model, const SolverConfig& config = {}) {
    validate_config(config);
    const Eigen::Index n = model.size();
    if (model.stats.sigma.rows() != n || model.stats.sigma.cols() != n) {
        throw DimensionMismatch("covariance matrix does not match asset count");
    }

    const auto [tau_min, tau_max] = feasible_return_range(model);
    (void)tau_min;
    const double margin = model.is_nominal() ? 1e-9 : 1e-6;
    if (model.tau > tau_max + margin) {
        return detail::infeasible_solution(n, 0);
    }

    const auto starts = detail::deterministic_starts(model, config);
    int best_index = -1;
    detail::AugmentedLagrangianRun best;
    for (std::size_t i = 0; i < starts.size(); ++i) {
        auto run = detail::augmented_lagrangian(model, starts[i], config);
        const bool feasible = run.slack >= -detail::kFeasibilityTolerance;
        if (!feasible) continue;
        if (best_index < 0 || run.risk < best.risk - 1e-12 ||
            (std::abs(run.risk - best.risk) <= 1e-12 && !best.converged && run.converged)) {
            best = std::move(run);
            best_index = static_cast<int>(i);
        }
    }

    if (best_index < 0) {
        return detail::infeasible_solution(n, static_cast<int>(starts.size()));
    }

    Solution sol;
    sol.weights = best.x;
    sol.risk = best.risk;
    sol.return_slack = best.slack;
    sol.status = best.converged ? SolveStatus::Converged : SolveStatus::NotConverged;
    sol.starts_used = static_cast<int>(starts.size());
    sol.best_start_index = best_index;
    return sol;
}

/// Exhaustive enumeration of the simplex lattice at the given resolution;
/// the independent brute-force ground truth for n <= 4.
inline Solution grid_oracle(const PortfolioModel& model, double step) {
    const Eigen::Index n = model.size();
    if (n > 4) throw TooManyAssets("grid oracle supports at most 4 assets");
    if (!(step > 0.0 && step < 1.0)) throw ConfigInvalid("oracle step must lie in (0, 1)");

    const long long N = std::llround(1.0 / step);
    Eigen::VectorXd x(n);
    Eigen::VectorXd best_x(n);
    double best_risk = std::numeric_limits<double>::infinity();
    double best_slack = std::numeric_limits<double>::quiet_NaN();
    bool found = false;

    // Lexicographic enumeration of lattice counts summing to N.
    std::vector<long long> counts(static_cast<std::size_t>(n), 0);
    const auto evaluate = [&]() {
        for (Eigen::Index j = 0; j < n; ++j) {
            x[j] = static_cast<double>(counts[static_cast<std::size_t>(j)]) /
                   static_cast<double>(N);
        }
        const double risk = objective(model, x);
        if (risk >= best_risk) return;
        const double slack = constraint_slack(model, x);
        if (slack >= 0.0) {
            best_risk = risk;
            best_x = x;
            best_slack = slack;
            found = true;
        }
    };
    const auto recurse = [&](auto&& self, Eigen::Index level, long long remaining) -> void {
        if (level == n - 1) {
            counts[static_cast<std::size_t>(level)] = remaining;
            evaluate();
            return;
        }
        for (long long k = 0; k <= remaining; ++k) {
            counts[static_cast<std::size_t>(level)] = k;
            self(self, level + 1, remaining - k);
        }
    };
    recurse(recurse, 0, N);

    if (!found) {
        return detail::infeasible_solution(n, 0);
    }
    Solution sol;
    sol.weights = best_x;
    sol.risk = best_risk;
    sol.return_slack = best_slack;
    sol.status = SolveStatus::Converged;
    return sol;
}

}  // namespace ccfolio
