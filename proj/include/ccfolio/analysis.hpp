#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ccfolio/errors.hpp"
#include "ccfolio/models.hpp"
#include "ccfolio/prices.hpp"
#include "ccfolio/random.hpp"
#include "ccfolio/solver.hpp"

namespace ccfolio {

struct FrontierPoint {
    double tau = 0.0;
    Solution solution;
};

/// Risk values of one model over an ascending tau grid.
struct Frontier {
    std::string model_tag;
    std::vector<std::string> asset_labels;
    std::vector<FrontierPoint> points;

    /// Risk column; requires every point to be converged.
    Eigen::VectorXd risks() const {
        Eigen::VectorXd r(static_cast<Eigen::Index>(points.size()));
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (points[i].solution.status != SolveStatus::Converged) {
                throw Error("frontier point at tau " + std::to_string(points[i].tau) +
                            " is not converged");
            }
            r[static_cast<Eigen::Index>(i)] = points[i].solution.risk;
        }
        return r;
    }
};

/// Symmetric matrix of pairwise Euclidean distances between models' risk
/// vectors; zero diagonal.
struct DissimilarityMatrix {
    std::vector<std::string> labels;
    Eigen::MatrixXd d;
};

/// Solves the model template once per tau, independently; infeasible points
/// are carried with their status. `threads` caps the number of worker
/// threads; results are merged by tau index, so the outcome does not depend
/// on scheduling.
inline Frontier sweep_frontier(const PortfolioModel& model_template,
                               const std::vector<double>& taus, const SolverConfig& config,
                               int threads = 1) {
    for (std::size_t i = 1; i < taus.size(); ++i) {
        if (!(taus[i] > taus[i - 1])) {
            throw UnsortedTaus("tau grid must be strictly increasing");
        }
    }
    Frontier frontier;
    frontier.model_tag = variant_tag(model_template);
    frontier.asset_labels = model_template.stats.asset_labels;
    frontier.points.resize(taus.size());

    const auto solve_index = [&](std::size_t i) {
        frontier.points[i].tau = taus[i];
        frontier.points[i].solution = solve(with_tau(model_template, taus[i]), config);
    };

    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(taus.size())));
    if (workers <= 1) {
        for (std::size_t i = 0; i < taus.size(); ++i) solve_index(i);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w]() {
                for (std::size_t i = static_cast<std::size_t>(w); i < taus.size();
                     i += static_cast<std::size_t>(workers)) {
                    solve_index(i);
                }
            });
        }
        for (auto& t : pool) t.join();
    }
    return frontier;
}

/// D_pq = || r_p - r_q ||_2 over equal-length risk vectors.
inline DissimilarityMatrix dissimilarity_matrix(const std::vector<Eigen::VectorXd>& risk_vectors,
                                                const std::vector<std::string>& labels) {
    if (risk_vectors.size() != labels.size()) {
        throw LengthMismatch("one label per risk vector required");
    }
    const std::size_t m = risk_vectors.size();
    for (std::size_t p = 1; p < m; ++p) {
        if (risk_vectors[p].size() != risk_vectors[0].size()) {
            throw LengthMismatch("risk vectors must share one tau grid");
        }
    }
    DissimilarityMatrix out;
    out.labels = labels;
    out.d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t p = 0; p < m; ++p) {
        for (std::size_t q = p + 1; q < m; ++q) {
            const double dist = (risk_vectors[p] - risk_vectors[q]).norm();
            out.d(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) = dist;
            out.d(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(p)) = dist;
        }
    }
    return out;
}

/// Empirical probability that the perturbed portfolio return meets tau:
/// draws zeta from the spec's distribution with the documented deterministic
/// transforms and counts mu0'x + sum shift_j x_j zeta_j >= tau.
inline double monte_carlo_validate(const Eigen::VectorXd& weights, const ReturnStatistics& stats,
                                   const PerturbationSpec& spec, double tau,
                                   std::int64_t samples, std::uint64_t seed) {
    const Eigen::Index n = stats.size();
    if (weights.size() != n || spec.shifts.size() != n) {
        throw DimensionMismatch("weights/shifts must match the asset count");
    }
    if (samples < 1) throw ConfigInvalid("samples must be >= 1");

    const double base_return = stats.mu0.dot(weights);
    const Eigen::VectorXd weighted_shift =
        (spec.shifts.array() * weights.array()).matrix();

    DeterministicSampler sampler(seed);
    std::int64_t hits = 0;
    if (spec.is_normal()) {
        const auto& dist = spec.normal();
        if (dist.means.size() != n || dist.stddevs.size() != n) {
            throw DimensionMismatch("normal perturbation parameters");
        }
        for (std::int64_t s = 0; s < samples; ++s) {
            double perturbed = base_return;
            for (Eigen::Index j = 0; j < n; ++j) {
                perturbed += weighted_shift[j] * sampler.normal(dist.means[j], dist.stddevs[j]);
            }
            if (perturbed >= tau) ++hits;
        }
    } else {
        const auto& dist = spec.exponential();
        if (dist.rates.size() != n) {
            throw DimensionMismatch("exponential perturbation parameters");
        }
        for (std::int64_t s = 0; s < samples; ++s) {
            double perturbed = base_return;
            for (Eigen::Index j = 0; j < n; ++j) {
                perturbed += weighted_shift[j] * sampler.exponential(dist.rates[j]);
            }
            if (perturbed >= tau) ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(samples);
}

// ---------------------------------------------------------------------------
// Frontier CSV: header `tau,risk,status,w_<label1>,...`, %.6f numbers, LF
// line endings. Infeasible points carry empty risk and weight cells.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace detail

inline void write_frontier_csv(std::ostream& out, const Frontier& frontier) {
    out << "tau,risk,status";
    for (const auto& label : frontier.asset_labels) out << ",w_" << label;
    out << "\n";
    for (const auto& point : frontier.points) {
        out << detail::format_fixed(point.tau) << ",";
        const bool has_weights = point.solution.status != SolveStatus::Infeasible;
        if (has_weights) out << detail::format_fixed(point.solution.risk);
        out << "," << to_string(point.solution.status);
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(frontier.asset_labels.size());
             ++j) {
            out << ",";
            if (has_weights) out << detail::format_fixed(point.solution.weights[j]);
        }
        out << "\n";
    }
}

inline Frontier read_frontier_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw MalformedCsv("missing frontier header");
    auto header = detail::split_csv_line(line);
    if (header.size() < 4 || header[0] != "tau" || header[1] != "risk" ||
        header[2] != "status") {
        throw MalformedCsv("frontier header must be 'tau,risk,status,w_<label>,...'");
    }
    Frontier frontier;
    for (std::size_t j = 3; j < header.size(); ++j) {
        if (header[j].rfind("w_", 0) != 0) {
            throw MalformedCsv("weight columns must be prefixed 'w_'");
        }
        frontier.asset_labels.push_back(header[j].substr(2));
    }
    const std::size_t n = frontier.asset_labels.size();
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto fields = detail::split_csv_line(line);
        if (fields.size() != n + 3) {
            throw MalformedCsv("frontier row " + std::to_string(lineno) + " is ragged");
        }
        FrontierPoint point;
        point.tau = std::stod(fields[0]);
        point.solution.status = solve_status_from_string(fields[2]);
        if (point.solution.status != SolveStatus::Infeasible) {
            point.solution.risk = std::stod(fields[1]);
            point.solution.weights.resize(static_cast<Eigen::Index>(n));
            for (std::size_t j = 0; j < n; ++j) {
                point.solution.weights[static_cast<Eigen::Index>(j)] = std::stod(fields[3 + j]);
            }
        }
        frontier.points.push_back(std::move(point));
    }
    return frontier;
}

inline nlohmann::json dissimilarity_to_json(const DissimilarityMatrix& matrix) {
    nlohmann::json j;
    j["labels"] = matrix.labels;
    std::vector<std::vector<double>> rows;
    for (Eigen::Index i = 0; i < matrix.d.rows(); ++i) {
        rows.emplace_back(matrix.d.row(i).begin(), matrix.d.row(i).end());
    }
    j["matrix"] = rows;
    return j;
}

}  // namespace ccfolio
