#pragma once

// JSON kernel files. One kernel:
//   {"order": 2, "factors": [{"breakpoints": [0, 1], "values": [1]}, ...], "weight": 1.0,
//    "symmetrize": true}
// A chaos vector: {"constant": 0.0, "kernels": [<kernel>, ...]}, or a bare array of kernels.

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lentp/chaos.hpp"
#include "lentp/errors.hpp"
#include "lentp/kernel.hpp"

namespace lentp {

inline StepFunction step_function_from_json(const nlohmann::json& j) {
    try {
        return {j.at("breakpoints").get<std::vector<double>>(), j.at("values").get<std::vector<double>>()};
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("step function: ") + e.what());
    }
}

inline nlohmann::json to_json(const StepFunction& f) {
    return {{"breakpoints", f.breakpoints()}, {"values", f.values()}};
}

inline SimplexKernel kernel_from_json(const nlohmann::json& j, std::size_t max_order = default_max_order) {
    if (!j.is_object()) throw ConfigError("kernel: expected a JSON object");
    std::vector<StepFunction> factors;
    try {
        for (const auto& f : j.at("factors")) factors.push_back(step_function_from_json(f));
        const auto order = j.at("order").get<std::size_t>();
        const double weight = j.value("weight", 1.0);
        const bool symmetrize = j.value("symmetrize", true);
        return SimplexKernel::with_order(order, std::move(factors), weight,
                                         symmetrize ? KernelForm::symmetrized : KernelForm::simplex, max_order);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("kernel: ") + e.what());
    }
}

inline nlohmann::json to_json(const SimplexKernel& k) {
    nlohmann::json factors = nlohmann::json::array();
    for (const auto& f : k.factors()) factors.push_back(to_json(f));
    return {{"order", k.order()},
            {"factors", factors},
            {"weight", k.weight()},
            {"symmetrize", k.form() == KernelForm::symmetrized}};
}

inline ChaosVector chaos_from_json(const nlohmann::json& j, std::size_t max_order = default_max_order) {
    double constant = 0.0;
    const nlohmann::json* list = &j;
    if (j.is_object() && j.contains("kernels")) {
        constant = j.value("constant", 0.0);
        list = &j.at("kernels");
    } else if (j.is_object()) {
        return ChaosVector(0.0, {kernel_from_json(j, max_order)});
    }
    if (!list->is_array()) throw ConfigError("chaos vector: 'kernels' must be an array");
    std::vector<SimplexKernel> terms;
    for (const auto& k : *list) {
        auto kernel = kernel_from_json(k, max_order);
        if (kernel.order() == 0) {
            constant += kernel.weight();
        } else {
            terms.push_back(std::move(kernel));
        }
    }
    return ChaosVector(constant, std::move(terms));
}

inline ChaosVector load_chaos_file(const std::string& path, std::size_t max_order = default_max_order) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open kernel file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("kernel file '" + path + "': " + e.what());
    }
    return chaos_from_json(j, max_order);
}

}  // namespace lentp
