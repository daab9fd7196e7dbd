#pragma once

// Named experiments: one per acceptance criterion, plus path export. Each
// experiment declares its parameters with defaults; a run merges defaults,
// a JSON config file and command-line overrides, and returns a CSV table
// with pass/fail checks whose thresholds are fixed here, not in the config.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

namespace lentp::experiments {

struct Check {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string relation;  // how value is compared with threshold, e.g. "<=", ">="
};

struct ExperimentResult {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<Check> checks;
    std::size_t attempted_paths = 0;
    std::size_t excluded_paths = 0;  // numerical blow-ups
    nlohmann::json notes = nlohmann::json::object();

    [[nodiscard]] bool all_passed() const;
    [[nodiscard]] double exclusion_rate() const;
};

struct ExperimentConfig {
    std::string experiment;
    nlohmann::json params = nlohmann::json::object();
    unsigned workers = 1;
};

struct ExperimentInfo {
    std::string name;
    std::string description;
    nlohmann::json defaults;
    std::function<ExperimentResult(const nlohmann::json& params, unsigned workers)> run;
};

const std::vector<ExperimentInfo>& registry();
const ExperimentInfo& find_experiment(const std::string& name);

/// Experiments whose name contains `filter` (all when empty).
std::vector<const ExperimentInfo*> list_experiments(const std::string& filter);

/// defaults <- file <- overrides, rejecting unknown keys and wrong types.
nlohmann::json resolve_params(const std::string& experiment, const nlohmann::json& file_params,
                              const nlohmann::json& overrides);

ExperimentResult run_experiment(const ExperimentConfig& config);

std::string render_csv(const ExperimentResult& result);
nlohmann::json render_summary(const ExperimentConfig& config, const ExperimentResult& result);

/// Process exit status: 0 all checks pass, 1 a check failed, 3 blow-up rate above 0.1%.
int exit_status(const ExperimentResult& result);

inline constexpr double max_exclusion_rate = 1e-3;

}  // namespace lentp::experiments
