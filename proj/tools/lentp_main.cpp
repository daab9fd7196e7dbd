// lentp: run the named numerical experiments of the library.
//
//   lentp list [filter]
//   lentp run <experiment> [--config file.json] [--seed N] [--n-paths N] ...
//
// Exit codes: 0 all checks pass, 1 a check failed, 2 bad configuration,
// 3 too many numerical blow-ups.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "experiments.hpp"
#include "lentp/errors.hpp"
#include "lentp/monte_carlo.hpp"
#include "lentp/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
namespace ex = lentp::experiments;

namespace {

json parse_scalar(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::exception&) {
        return text;  // bare string
    }
}

json read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw lentp::ConfigError("cannot open config file '" + path + "'");
    try {
        json j = json::parse(in);
        // either {"experiment": ..., "params": {...}} or a flat parameter object
        if (j.contains("params")) return j.at("params");
        j.erase("experiment");
        return j;
    } catch (const json::parse_error& e) {
        throw lentp::ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
}

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw lentp::ConfigError("cannot write '" + path.string() + "'");
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lent-particle and chaos-rotation Monte Carlo experiments"};
    app.set_version_flag("--version", std::string(lentp::version));
    app.require_subcommand(1);

    std::string filter;
    auto* list = app.add_subcommand("list", "List experiments");
    list->add_option("filter", filter, "Substring to match");

    std::string name, config_path, output;
    std::optional<std::uint64_t> seed;
    std::optional<long long> n_paths, grid_steps, order;
    std::optional<double> horizon, theta, sigma, b, c, h_norm_sq;
    std::optional<std::string> sde;
    std::vector<std::string> sets;
    unsigned workers = lentp::default_workers();

    auto* run = app.add_subcommand("run", "Run one experiment");
    run->add_option("experiment", name, "Experiment name")->required();
    run->add_option("--config", config_path, "JSON parameter file");
    run->add_option("--seed", seed, "Master seed");
    run->add_option("--n-paths", n_paths, "Monte Carlo paths");
    run->add_option("--grid-steps", grid_steps, "Time steps on [0,T]");
    run->add_option("--horizon", horizon, "Horizon T");
    run->add_option("--theta", theta, "Rotation or perturbation size");
    run->add_option("--order", order, "Single chaos order");
    run->add_option("--sde", sde, "gbm, additive, sine or all");
    run->add_option("--sigma", sigma, "GBM volatility");
    run->add_option("--b", b, "Drift coefficient");
    run->add_option("--c", c, "Additive noise level");
    run->add_option("--h-norm-sq", h_norm_sq, "|h|^2 for exponential vectors");
    run->add_option("--set", sets, "Override any parameter, key=value (value parsed as JSON)");
    run->add_option("--output", output, "CSV output path (summary JSON is written next to it)");
    run->add_option("--workers", workers, "Worker threads (results do not depend on this)")
        ->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*list) {
            for (const auto* e : ex::list_experiments(filter)) {
                std::cout << e->name << "\t" << e->description << "\n    defaults: " << e->defaults.dump() << "\n";
            }
            return 0;
        }

        json overrides = json::object();
        if (seed) overrides["seed"] = *seed;
        if (n_paths) overrides["n_paths"] = *n_paths;
        if (grid_steps) overrides["n_steps"] = *grid_steps;
        if (horizon) overrides["horizon"] = *horizon;
        if (theta) overrides["theta"] = *theta;
        if (order) overrides["orders"] = json::array({*order});
        if (sde) overrides["sde"] = *sde;
        if (sigma) overrides["sigma"] = *sigma;
        if (b) overrides["b"] = *b;
        if (c) overrides["c"] = *c;
        if (h_norm_sq) overrides["h_norm_sq"] = name == "bessel" ? json::array({*h_norm_sq}) : json(*h_norm_sq);
        for (const auto& kv : sets) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos || eq == 0) throw lentp::ConfigError("--set expects key=value, got '" + kv + "'");
            overrides[kv.substr(0, eq)] = parse_scalar(kv.substr(eq + 1));
        }

        const json file_params = config_path.empty() ? json::object() : read_config(config_path);
        ex::ExperimentConfig cfg{name, ex::resolve_params(name, file_params, overrides), workers};
        const auto result = ex::run_experiment(cfg);

        fs::path csv_path = output;
        if (csv_path.empty()) {
            const char* dir = std::getenv("LENTP_OUTPUT_DIR");
            csv_path = fs::path(dir ? dir : ".") / (name + ".csv");
        }
        auto summary_path = csv_path;
        summary_path.replace_extension(".summary.json");
        const auto summary = ex::render_summary(cfg, result);
        write_file(csv_path, ex::render_csv(result));
        write_file(summary_path, summary.dump(2) + "\n");

        for (const auto& chk : result.checks) {
            std::cout << (chk.passed ? "PASS  " : "FAIL  ") << chk.name << "  (" << chk.value << " " << chk.relation
                      << " " << chk.threshold << ")\n";
        }
        const int status = ex::exit_status(result);
        if (status == 3) {
            std::cerr << "numerical blow-up rate " << result.exclusion_rate() << " exceeds " << ex::max_exclusion_rate
                      << "\n";
        }
        std::cout << "wrote " << csv_path.string() << " and " << summary_path.string() << "\n";
        return status;
    } catch (const lentp::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const lentp::DomainError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const lentp::DimensionError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
