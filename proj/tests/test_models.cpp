#include <catch2/catch.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <fstream>

#include "ccfolio/fixtures.hpp"
#include "ccfolio/models.hpp"
#include "ccfolio/random.hpp"
#include "ccfolio/simplex.hpp"
#include "reference_results.hpp"

#ifndef CCFOLIO_DATA_DIR
#define CCFOLIO_DATA_DIR "data"
#endif

using namespace ccfolio;

namespace {

Eigen::VectorXd vec3(double a, double b, double c) {
    return Eigen::Vector3d(a, b, c);
}

Eigen::VectorXd random_simplex_point(DeterministicSampler& sampler, Eigen::Index n) {
    Eigen::VectorXd x(n);
    for (Eigen::Index j = 0; j < n; ++j) x[j] = sampler.exponential(1.0);
    return x / x.sum();
}

}  // namespace

TEST_CASE("objective is half the quadratic form", "[models]") {
    const auto model = fixtures::nifty_nominal_model(1.5);
    CHECK(objective(model, vec3(1, 0, 0)) == Approx(12.063).margin(1e-12));
    CHECK(objective(model, vec3(0.1415, 0.5545, 0.3040)) ==
          Approx(reference::kNominalRisks[0]).margin(1e-3));
    CHECK(objective(model, Eigen::Vector3d::Zero()) == 0.0);
    CHECK_THROWS_AS(objective(model, Eigen::Vector2d::Zero()), DimensionMismatch);
}

TEST_CASE("objective gradient", "[models]") {
    const auto model = fixtures::nifty_nominal_model(1.5);
    CHECK(objective_gradient(model, Eigen::Vector3d::Zero()).isZero(0.0));

    ReturnStatistics eye;
    eye.asset_labels = {"A", "B", "C"};
    eye.mu0 = vec3(1, 2, 3);
    eye.sigma = Eigen::Matrix3d::Identity();
    const auto identity_model = nominal_model(eye, 1.0);
    const Eigen::VectorXd x = vec3(0.3, -0.4, 1.7);
    CHECK(objective_gradient(identity_model, x) == x);

    // Central finite differences on the dense covariance.
    DeterministicSampler sampler(55);
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::VectorXd p = random_simplex_point(sampler, 3);
        const Eigen::VectorXd grad = objective_gradient(model, p);
        constexpr double h = 1e-5;
        for (Eigen::Index j = 0; j < 3; ++j) {
            Eigen::VectorXd up = p, down = p;
            up[j] += h;
            down[j] -= h;
            const double fd = (objective(model, up) - objective(model, down)) / (2.0 * h);
            CHECK(grad[j] == Approx(fd).epsilon(1e-6));
        }
    }
}

TEST_CASE("zero-mean normal slack at beta one half reduces to nominal", "[models]") {
    const auto nominal = fixtures::nifty_nominal_model(2.0);
    const auto robust = fixtures::nifty_robust_normal_model(2.0, 0.5);
    DeterministicSampler sampler(17);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::VectorXd x = random_simplex_point(sampler, 3);
        CHECK(constraint_slack(robust, x) ==
              Approx(constraint_slack(nominal, x)).margin(1e-12));
    }
}

TEST_CASE("normal slack tightens as beta grows", "[models]") {
    DeterministicSampler sampler(23);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::VectorXd x = random_simplex_point(sampler, 3);
        const double lo = constraint_slack(fixtures::nifty_robust_normal_model(2.0, 0.6), x);
        const double hi = constraint_slack(fixtures::nifty_robust_normal_model(2.0, 0.9), x);
        CHECK(hi < lo);
    }
}

TEST_CASE("normal slack at a reference optimum is binding", "[models]") {
    const auto model = fixtures::nifty_robust_normal_model(1.5);
    const Eigen::VectorXd x = vec3(0.1371, 0.5321, 0.3308);
    CHECK(std::abs(constraint_slack(model, x)) <= 5e-3);
}

TEST_CASE("exponential slack regimes", "[models]") {
    SECTION("nominal return already meets tau") {
        const auto model = fixtures::nifty_robust_exponential_model(1.0);
        const Eigen::VectorXd x = vec3(0.2, 0.3, 0.5);  // mu0'x = 2.257
        CHECK(constraint_slack(model, x) == 1.0 - 0.95);
    }
    SECTION("all shifts dropped with a positive gap") {
        PerturbationSpec spec;
        spec.shifts = Eigen::Vector3d::Zero();
        spec.distribution = ExponentialPerturbation{Eigen::Vector3d::Ones()};
        const auto model = robust_exponential_model(
            fixtures::nifty_sector_statistics(), 5.0, spec, 0.95);
        const Eigen::VectorXd x = vec3(1.0 / 3, 1.0 / 3, 1.0 / 3);  // mu0'x = 2.502
        CHECK(constraint_slack(model, x) == -0.95);
    }
    SECTION("interior case uses the weighted-exponential CDF") {
        const auto model = fixtures::nifty_robust_exponential_model(2.55);
        const Eigen::VectorXd x = vec3(1.0 / 3, 1.0 / 3, 1.0 / 3);
        const double a = 2.55 - model.stats.mu0.dot(x);
        REQUIRE(a > 0.0);
        WeightedExponentialSum sum(vec3(0.2 / 3, 0.1 / 3, 0.3 / 3), Eigen::Vector3d::Ones());
        CHECK(constraint_slack(model, x) ==
              Approx(0.05 - hypoexp_cdf(sum, a)).margin(1e-12));
    }
}

TEST_CASE("exponential slack is continuous across the drop threshold", "[models]") {
    const auto base = fixtures::nifty_robust_exponential_model(3.0);
    // Walk asset 1's weighted shift across the 1e-9 cutoff.
    const double x1_at_threshold = kZeroWeightThreshold / 0.2;
    for (double scale : {0.5, 0.9, 1.1, 2.0}) {
        const double x1 = x1_at_threshold * scale;
        const Eigen::VectorXd x = vec3(x1, 0.45 - x1, 0.55);
        const double slack = constraint_slack(base, x);
        const Eigen::VectorXd at = vec3(x1_at_threshold, 0.45 - x1_at_threshold, 0.55);
        CHECK(std::abs(slack - constraint_slack(base, at)) <= 1e-4);
    }
}

TEST_CASE("objective is convex", "[models]") {
    const auto model = fixtures::nifty_nominal_model(1.5);
    DeterministicSampler sampler(31);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::VectorXd x = random_simplex_point(sampler, 3);
        const Eigen::VectorXd y = random_simplex_point(sampler, 3);
        const double t = sampler.uniform();
        CHECK(objective(model, t * x + (1 - t) * y) <=
              t * objective(model, x) + (1 - t) * objective(model, y) + 1e-12);
    }
}

TEST_CASE("feasible return range", "[models]") {
    SECTION("nominal extremes are the best and worst single assets") {
        const auto [lo, hi] = feasible_return_range(fixtures::nifty_nominal_model(1.5));
        CHECK(lo == -1.430);
        CHECK(hi == 6.329);
    }
    SECTION("single asset collapses the range") {
        ReturnStatistics one;
        one.asset_labels = {"A"};
        one.mu0 = Eigen::VectorXd::Constant(1, 4.2);
        one.sigma = Eigen::MatrixXd::Constant(1, 1, 9.0);
        const auto [lo, hi] = feasible_return_range(nominal_model(one, 1.0));
        CHECK(lo == 4.2);
        CHECK(hi == 4.2);
    }
    SECTION("the normal cone term only shrinks the attainable maximum") {
        const auto model = fixtures::nifty_robust_normal_model(1.5);
        const auto [lo, hi] = feasible_return_range(model);
        (void)lo;
        CHECK(hi <= 6.329);
        // Compare against a direct grid evaluation of the return side.
        PortfolioModel probe = model;
        probe.tau = 0.0;
        double grid_best = -1e300;
        for (int i = 0; i <= 100; ++i) {
            for (int j = 0; j <= 100 - i; ++j) {
                const Eigen::VectorXd x = vec3(i / 100.0, j / 100.0, 1.0 - i / 100.0 - j / 100.0);
                grid_best = std::max(grid_best, constraint_slack(probe, x));
            }
        }
        CHECK(hi >= grid_best - 1e-6);
        CHECK(hi == Approx(5.8355).margin(1e-3));
    }
}

TEST_CASE("model construction validates its inputs", "[models]") {
    const auto stats = fixtures::nifty_sector_statistics();

    PerturbationSpec spec;
    spec.shifts = vec3(0.2, 0.1, 0.3);
    spec.distribution = NormalPerturbation{Eigen::Vector3d::Zero(), Eigen::Vector3d::Ones()};

    CHECK_THROWS_AS(robust_normal_model(stats, 1.5, spec, 0.0), InvalidModel);
    CHECK_THROWS_AS(robust_normal_model(stats, 1.5, spec, 1.0), InvalidModel);
    CHECK_THROWS_AS(robust_exponential_model(stats, 1.5, spec, 0.95), InvalidModel);

    PerturbationSpec negative = spec;
    negative.shifts = vec3(-0.1, 0.1, 0.3);
    CHECK_THROWS_AS(robust_normal_model(stats, 1.5, negative, 0.95), InvalidModel);

    PerturbationSpec short_shifts = spec;
    short_shifts.shifts = Eigen::Vector2d(0.2, 0.1);
    CHECK_THROWS_AS(robust_normal_model(stats, 1.5, short_shifts, 0.95), DimensionMismatch);

    PerturbationSpec bad_stddev = spec;
    bad_stddev.distribution =
        NormalPerturbation{Eigen::Vector3d::Zero(), vec3(1.0, 0.0, 1.0)};
    CHECK_THROWS_AS(robust_normal_model(stats, 1.5, bad_stddev, 0.95), InvalidModel);
}

TEST_CASE("model JSON round trip", "[models]") {
    const auto model = fixtures::nifty_robust_normal_model(2.5);
    const auto j = model_to_json(model);
    const auto back = model_from_json(j);
    CHECK(variant_tag(back) == "robust_normal");
    CHECK(back.tau == model.tau);
    CHECK(back.beta() == model.beta());
    CHECK(back.stats.mu0 == model.stats.mu0);
    CHECK(back.perturbation().shifts == model.perturbation().shifts);

    const auto expo = fixtures::nifty_robust_exponential_model(3.5);
    const auto expo_back = model_from_json(model_to_json(expo));
    CHECK(variant_tag(expo_back) == "robust_exponential");
    CHECK(expo_back.perturbation().exponential().rates == Eigen::Vector3d::Ones());
}

TEST_CASE("model JSON rejects malformed documents", "[models]") {
    auto j = model_to_json(fixtures::nifty_robust_normal_model(2.5));

    auto bad_variant = j;
    bad_variant["variant"] = "robust_gamma";
    CHECK_THROWS_AS(model_from_json(bad_variant), InvalidModel);

    auto missing_params = j;
    missing_params.erase("dist_params");
    CHECK_THROWS_AS(model_from_json(missing_params), InvalidModel);

    auto bad_beta = j;
    bad_beta["beta"] = 1.5;
    CHECK_THROWS_AS(model_from_json(bad_beta), InvalidModel);

    auto ragged = j;
    ragged["shifts"] = std::vector<double>{0.2, 0.1};
    CHECK_THROWS_AS(model_from_json(ragged), DimensionMismatch);
}

TEST_CASE("bundled model files match the built-in fixtures", "[models]") {
    const auto load = [](const std::string& name) {
        std::ifstream in(std::string(CCFOLIO_DATA_DIR) + "/" + name);
        REQUIRE(in.good());
        return model_from_json(nlohmann::json::parse(in));
    };

    const auto nominal = load("nominal_model.json");
    CHECK(variant_tag(nominal) == "nominal");
    CHECK(nominal.stats.mu0 == fixtures::nifty_sector_statistics().mu0);
    CHECK(nominal.stats.sigma == fixtures::nifty_sector_statistics().sigma);

    const auto normal = load("robust_normal_model.json");
    CHECK(variant_tag(normal) == "robust_normal");
    CHECK(normal.beta() == 0.95);
    CHECK(normal.perturbation().shifts == fixtures::nifty_basic_shifts());

    const auto expo = load("robust_exponential_model.json");
    CHECK(variant_tag(expo) == "robust_exponential");
    CHECK(expo.perturbation().exponential().rates == Eigen::Vector3d::Ones());
}
