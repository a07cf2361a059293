#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <vector>

namespace ccfolio {

/// Euclidean projection onto the unit simplex {x : sum x_i = 1, x >= 0}
/// by the sort-and-threshold construction.
inline Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
    const Eigen::Index n = v.size();
    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cumulative = 0.0;
    double theta = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        cumulative += u[static_cast<std::size_t>(k)];
        const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
        if (u[static_cast<std::size_t>(k)] - candidate > 0.0) {
            theta = candidate;
        }
    }
    return (v.array() - theta).max(0.0);
}

}  // namespace ccfolio
