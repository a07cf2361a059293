// Command-line front end: price ingestion, frontier sweeps, dissimilarity
// matrices and Monte Carlo chance-constraint validation.
//
// Exit codes: 0 ok, 2 bad input, 3 I/O failure, 4 invalid solver config,
// 5 validation below target.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ccfolio/ccfolio.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitIo = 3;
constexpr int kExitConfig = 4;
constexpr int kExitValidation = 5;

/// `fixture:<name>` resolves into the fixture directory (CCFOLIO_FIXTURE_DIR,
/// default ./data); anything else is used verbatim.
std::string resolve_input_path(const std::string& arg) {
    const std::string prefix = "fixture:";
    if (arg.rfind(prefix, 0) != 0) return arg;
    const char* dir = std::getenv("CCFOLIO_FIXTURE_DIR");
    return std::string(dir ? dir : "data") + "/" + arg.substr(prefix.size());
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::ios_base::failure("cannot open input file: " + path);
    return in;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out.good()) throw std::ios_base::failure("cannot write output file: " + path);
}

struct ManifestWriter {
    std::string command;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    nlohmann::json config;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

    void write(const std::string& path) const {
        if (path.empty()) return;
        nlohmann::json j;
        j["command"] = command;
        j["inputs"] = inputs;
        j["outputs"] = outputs;
        j["config"] = config;
        j["duration_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        write_text_file(path, j.dump(2) + "\n");
    }
};

std::vector<double> parse_tau_grid(const std::string& spec) {
    double start = 0.0, step = 0.0, end = 0.0;
    char sep1 = 0, sep2 = 0;
    std::istringstream in(spec);
    if (!(in >> start >> sep1 >> step >> sep2 >> end) || sep1 != ':' || sep2 != ':' ||
        !in.eof()) {
        throw ccfolio::UnsortedTaus("tau grid must have the form start:step:end");
    }
    if (!(step > 0.0) || end < start) {
        throw ccfolio::UnsortedTaus("tau grid requires step > 0 and end >= start");
    }
    std::vector<double> taus;
    for (int k = 0;; ++k) {
        const double tau = start + k * step;
        if (tau > end + 0.5 * step) break;
        taus.push_back(tau);
    }
    return taus;
}

ccfolio::PortfolioModel load_model(const std::string& path) {
    auto in = open_input(path);
    return ccfolio::model_from_json(nlohmann::json::parse(in));
}

nlohmann::json solver_config_json(const ccfolio::SolverConfig& config) {
    return {{"tolerance", config.tolerance},
            {"max_iterations", config.max_iterations},
            {"multistart_count", config.multistart_count},
            {"seed", config.rng_seed},
            {"penalty_growth", config.penalty_growth}};
}

int cmd_stats(const std::string& prices_path, const std::string& out_path, int resample_step,
              const std::string& manifest_path) {
    ManifestWriter manifest;
    manifest.command = "stats";
    const std::string resolved = resolve_input_path(prices_path);
    manifest.inputs = {resolved};
    manifest.config = {{"resample", resample_step}};

    auto in = open_input(resolved);
    auto series = ccfolio::load_prices(in);
    if (resample_step > 1) series = ccfolio::resample(series, resample_step);
    const auto stats = ccfolio::estimate_statistics(ccfolio::compute_returns(series));

    write_text_file(out_path, ccfolio::statistics_to_json(stats).dump(2) + "\n");
    manifest.outputs = {out_path};
    manifest.write(manifest_path);
    return kExitOk;
}

int cmd_frontier(const std::string& model_path, const std::string& tau_spec,
                 const std::string& out_path, const ccfolio::SolverConfig& config, int threads,
                 const std::string& manifest_path) {
    ManifestWriter manifest;
    manifest.command = "frontier";
    const std::string resolved = resolve_input_path(model_path);
    manifest.inputs = {resolved};

    const auto model = load_model(resolved);
    const auto taus = parse_tau_grid(tau_spec);
    ccfolio::validate_config(config);

    manifest.config = solver_config_json(config);
    manifest.config["taus"] = tau_spec;
    manifest.config["threads"] = threads;
    manifest.config["variant"] = ccfolio::variant_tag(model);
    if (!model.is_nominal()) {
        const auto& spec = model.perturbation();
        manifest.config["beta"] = model.beta();
        manifest.config["shifts"] = std::vector<double>(
            spec.shifts.data(), spec.shifts.data() + spec.shifts.size());
        manifest.config["distribution"] = spec.is_normal() ? "normal" : "exponential";
    }

    const auto frontier = ccfolio::sweep_frontier(model, taus, config, threads);

    std::ostringstream csv;
    ccfolio::write_frontier_csv(csv, frontier);
    write_text_file(out_path, csv.str());

    std::cout << "model: " << frontier.model_tag << "\n";
    std::cout << "tau        risk       status\n";
    for (const auto& point : frontier.points) {
        const bool solved = point.solution.status != ccfolio::SolveStatus::Infeasible;
        std::printf("%-10.4f %-10s %s\n", point.tau,
                    solved ? ccfolio::detail::format_fixed(point.solution.risk).c_str() : "-",
                    ccfolio::to_string(point.solution.status).c_str());
    }

    manifest.outputs = {out_path};
    manifest.write(manifest_path);
    return kExitOk;
}

int cmd_dissimilarity(const std::vector<std::string>& frontier_paths, const std::string& out_path,
                      const std::string& manifest_path) {
    ManifestWriter manifest;
    manifest.command = "dissimilarity";
    if (frontier_paths.size() < 2) {
        throw ccfolio::LengthMismatch("need at least two frontier files");
    }

    std::vector<Eigen::VectorXd> risks;
    std::vector<std::string> labels;
    std::vector<double> reference_taus;
    for (const auto& path : frontier_paths) {
        const std::string resolved = resolve_input_path(path);
        manifest.inputs.push_back(resolved);
        auto in = open_input(resolved);
        const auto frontier = ccfolio::read_frontier_csv(in);
        std::vector<double> taus;
        for (const auto& point : frontier.points) taus.push_back(point.tau);
        if (risks.empty()) {
            reference_taus = taus;
        } else if (taus != reference_taus) {
            throw ccfolio::LengthMismatch("frontier files must share one tau grid");
        }
        risks.push_back(frontier.risks());
        labels.push_back(frontier.model_tag);
    }

    const auto matrix = ccfolio::dissimilarity_matrix(risks, labels);
    write_text_file(out_path, ccfolio::dissimilarity_to_json(matrix).dump(2) + "\n");

    manifest.outputs = {out_path};
    manifest.config = {{"files", static_cast<int>(frontier_paths.size())}};
    manifest.write(manifest_path);
    return kExitOk;
}

int cmd_validate(const std::string& model_path, const std::string& weights_csv,
                 const std::string& frontier_path, double at_tau, std::optional<double> tau_flag,
                 std::int64_t samples, std::uint64_t seed, const std::string& manifest_path) {
    ManifestWriter manifest;
    manifest.command = "validate";
    const std::string resolved = resolve_input_path(model_path);
    manifest.inputs = {resolved};

    auto model = load_model(resolved);
    if (model.is_nominal()) {
        throw ccfolio::InvalidModel("validate requires a robust model with a perturbation spec");
    }

    Eigen::VectorXd weights;
    if (!weights_csv.empty()) {
        std::vector<double> values;
        std::istringstream in(weights_csv);
        std::string field;
        while (std::getline(in, field, ',')) values.push_back(std::stod(field));
        weights = Eigen::Map<Eigen::VectorXd>(values.data(),
                                              static_cast<Eigen::Index>(values.size()));
    } else if (!frontier_path.empty()) {
        const std::string frontier_resolved = resolve_input_path(frontier_path);
        manifest.inputs.push_back(frontier_resolved);
        auto in = open_input(frontier_resolved);
        const auto frontier = ccfolio::read_frontier_csv(in);
        bool found = false;
        for (const auto& point : frontier.points) {
            if (std::abs(point.tau - at_tau) <= 1e-9) {
                if (point.solution.status == ccfolio::SolveStatus::Infeasible) {
                    throw ccfolio::InvalidModel("selected frontier row is infeasible");
                }
                weights = point.solution.weights;
                model.tau = point.tau;
                found = true;
                break;
            }
        }
        if (!found) {
            throw ccfolio::InvalidModel("no frontier row at the requested tau");
        }
    } else {
        throw ccfolio::InvalidModel("provide --weights or --from-frontier/--at-tau");
    }
    if (tau_flag) model.tau = *tau_flag;

    if (weights.size() != model.size()) {
        throw ccfolio::DimensionMismatch("weight count does not match the model");
    }
    if (weights.minCoeff() < -1e-9 || std::abs(weights.sum() - 1.0) > 1e-6) {
        throw ccfolio::InvalidModel("weights must lie on the unit simplex");
    }

    const double beta = model.beta();
    const double empirical = ccfolio::monte_carlo_validate(
        weights, model.stats, model.perturbation(), model.tau, samples, seed);
    const double stderr_hat =
        std::sqrt(std::max(0.0, empirical * (1.0 - empirical)) /
                  static_cast<double>(samples));

    std::printf("empirical probability: %.6f\n", empirical);
    std::printf("target beta:           %.6f\n", beta);
    std::printf("samples:               %lld\n", static_cast<long long>(samples));

    manifest.config = {{"samples", samples},
                       {"seed", seed},
                       {"tau", model.tau},
                       {"beta", beta}};
    manifest.write(manifest_path);
    return empirical >= beta - 3.0 * stderr_hat ? kExitOk : kExitValidation;
}

int dispatch_error(const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (dynamic_cast<const ccfolio::ConfigInvalid*>(&e)) return kExitConfig;
    if (dynamic_cast<const std::ios_base::failure*>(&e)) return kExitIo;
    if (dynamic_cast<const ccfolio::Error*>(&e)) return kExitInput;
    if (dynamic_cast<const nlohmann::json::exception*>(&e)) return kExitInput;
    if (dynamic_cast<const std::invalid_argument*>(&e)) return kExitInput;
    return kExitInput;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust portfolio optimization under return-chance constraints"};
    app.require_subcommand(1);

    // stats
    std::string prices_path, stats_out, manifest_path;
    int resample_step = 1;
    auto* stats = app.add_subcommand(
        "stats", "Estimate return statistics from a price CSV and write them as JSON");
    stats->add_option("prices", prices_path, "price CSV (or fixture:<name>)")->required();
    stats->add_option("out", stats_out, "output statistics JSON path")->required();
    stats->add_option("--resample", resample_step,
                      "keep every Nth price row (3 = monthly to quarterly)");
    stats->add_option("--manifest", manifest_path, "write a run manifest JSON here");

    // frontier
    std::string model_path, tau_spec = "1.5:0.2:3.5", frontier_out;
    int threads = 1;
    ccfolio::SolverConfig config;
    auto* frontier = app.add_subcommand(
        "frontier", "Sweep the efficient frontier of a model over a tau grid");
    frontier->add_option("model", model_path, "model JSON (or fixture:<name>)")->required();
    frontier->add_option("--taus", tau_spec, "tau grid start:step:end (default 1.5:0.2:3.5)");
    frontier->add_option("--out", frontier_out, "output frontier CSV path")->required();
    frontier->add_option("--tolerance", config.tolerance, "solver convergence tolerance");
    frontier->add_option("--max-iterations", config.max_iterations,
                         "inner iteration budget per start");
    frontier->add_option("--multistart", config.multistart_count,
                         "starts for the nonconvex variant");
    frontier->add_option("--penalty-growth", config.penalty_growth,
                         "constraint penalty escalation factor");
    frontier->add_option("--seed", config.rng_seed, "seed for the random starts");
    frontier->add_option("--threads", threads, "worker threads for the sweep");
    frontier->add_option("--manifest", manifest_path, "write a run manifest JSON here");

    // dissimilarity
    std::vector<std::string> frontier_paths;
    std::string dissimilarity_out;
    auto* dissimilarity = app.add_subcommand(
        "dissimilarity", "Euclidean distances between frontier risk columns");
    dissimilarity->add_option("frontiers", frontier_paths, "two or more frontier CSV files")
        ->required();
    dissimilarity->add_option("--out", dissimilarity_out, "output JSON path")->required();
    dissimilarity->add_option("--manifest", manifest_path, "write a run manifest JSON here");

    // validate
    std::string validate_model, weights_csv, from_frontier;
    double at_tau = 0.0;
    std::optional<double> tau_flag;
    std::int64_t samples = 1000000;
    std::uint64_t seed = 42;
    auto* validate = app.add_subcommand(
        "validate", "Monte Carlo check of the chance constraint at given weights");
    validate->add_option("model", validate_model, "robust model JSON (or fixture:<name>)")
        ->required();
    validate->add_option("--weights", weights_csv, "comma-separated weights on the simplex");
    validate->add_option("--from-frontier", from_frontier, "read weights from a frontier CSV");
    validate->add_option("--at-tau", at_tau, "tau of the frontier row to validate");
    validate->add_option("--tau", tau_flag, "override the model's target return");
    validate->add_option("--samples", samples, "Monte Carlo sample count");
    validate->add_option("--seed", seed, "sampler seed");
    validate->add_option("--manifest", manifest_path, "write a run manifest JSON here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitInput;
    }

    try {
        if (stats->parsed()) {
            return cmd_stats(prices_path, stats_out, resample_step, manifest_path);
        }
        if (frontier->parsed()) {
            return cmd_frontier(model_path, tau_spec, frontier_out, config, threads,
                                manifest_path);
        }
        if (dissimilarity->parsed()) {
            return cmd_dissimilarity(frontier_paths, dissimilarity_out, manifest_path);
        }
        return cmd_validate(validate_model, weights_csv, from_frontier, at_tau, tau_flag,
                            samples, seed, manifest_path);
    } catch (const std::exception& e) {
        return dispatch_error(e);
    }
}
