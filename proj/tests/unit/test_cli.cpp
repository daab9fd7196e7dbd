#include <gtest/gtest.h>

#include <string>

#include "experiments.hpp"
#include "lentp/errors.hpp"

using namespace lentp::experiments;
using nlohmann::json;

TEST(Registry, EveryCriterionHasAnExperiment) {
    for (const char* name : {"isometry", "covariance-decay", "bessel", "exp-vector-covariance", "chaos-energy",
                             "sde-lent-particle", "sde-poisson", "integration-by-parts", "mehler", "supremum",
                             "reproducibility"}) {
        EXPECT_NO_THROW(find_experiment(name)) << name;
    }
    EXPECT_THROW(find_experiment("nope"), lentp::ConfigError);
}

TEST(Registry, ListFilter) {
    EXPECT_EQ(list_experiments("").size(), registry().size());
    EXPECT_TRUE(list_experiments("zzz").empty());
    const auto sde = list_experiments("sde");
    ASSERT_EQ(sde.size(), 2u);
    EXPECT_EQ(sde[0]->name, "sde-lent-particle");
    EXPECT_EQ(sde[1]->name, "sde-poisson");
}

TEST(Config, OverridesBeatFileBeatDefaults) {
    const auto p = resolve_params("isometry", {{"n_paths", 10}, {"seed", 3}}, {{"n_paths", 20}});
    EXPECT_EQ(p["n_paths"], 20);
    EXPECT_EQ(p["seed"], 3);
    EXPECT_EQ(p["n_steps"], 1000);
}

TEST(Config, Rejections) {
    EXPECT_THROW(resolve_params("isometry", json::object(), {{"bogus", 1}}), lentp::ConfigError);
    EXPECT_THROW(resolve_params("isometry", json::object(), {{"n_paths", "many"}}), lentp::ConfigError);
    EXPECT_THROW(resolve_params("isometry", json::object(), {{"n_paths", 0}}), lentp::ConfigError);
    EXPECT_THROW(resolve_params("isometry", json::object(), {{"horizon", -1.0}}), lentp::ConfigError);
    EXPECT_THROW(resolve_params("isometry", json::object(), {{"seed", -4}}), lentp::ConfigError);
    EXPECT_THROW(resolve_params("chaos-energy", json::object(), {{"theta", 0.0}}), lentp::ConfigError);
    EXPECT_THROW(resolve_params("isometry", json::array(), json::object()), lentp::ConfigError);
}

TEST(Config, UnknownRegistryNamesRejectedBeforeSimulation) {
    ExperimentConfig cfg{"sde-lent-particle", resolve_params("sde-lent-particle", json::object(), {{"sde", "heston"}})};
    EXPECT_THROW(run_experiment(cfg), lentp::ConfigError);
    ExperimentConfig iso{"isometry", resolve_params("isometry", json::object(), {{"drivers", {"W"}}})};
    EXPECT_THROW(run_experiment(iso), lentp::ConfigError);
}

TEST(Run, BesselSummaryCarriesParametersAndVersion) {
    ExperimentConfig cfg{"bessel", resolve_params("bessel", json::object(), {{"h_norm_sq", {1.0}}})};
    const auto r = run_experiment(cfg);
    EXPECT_TRUE(r.all_passed());
    EXPECT_EQ(exit_status(r), 0);
    const auto s = render_summary(cfg, r);
    EXPECT_EQ(s["parameters"]["h_norm_sq"], json::array({1.0}));
    EXPECT_TRUE(s.contains("library_version"));
    EXPECT_TRUE(s["passed"].get<bool>());
    EXPECT_EQ(render_csv(r).substr(0, 17), "h_norm_sq,n,c_n_s");
}

TEST(Run, SmallIsometryIsWorkerIndependent) {
    ExperimentConfig cfg{"isometry", resolve_params("isometry", json::object(),
                                                    {{"n_paths", 500}, {"n_steps", 50}, {"orders", {2}}})};
    cfg.workers = 1;
    const auto a = render_csv(run_experiment(cfg));
    cfg.workers = 4;
    const auto b = render_csv(run_experiment(cfg));
    EXPECT_EQ(a, b);
    EXPECT_NE(a.find("driver,order,theta,empirical,exact,std_error,z_score"), std::string::npos);
}

TEST(Run, ExitStatusForBlowups) {
    ExperimentResult r;
    r.attempted_paths = 1000;
    r.excluded_paths = 2;
    EXPECT_EQ(exit_status(r), 3);
    r.excluded_paths = 1;
    EXPECT_EQ(exit_status(r), 0);
    r.checks.push_back({"x", false, 1.0, 0.0, "<="});
    EXPECT_EQ(exit_status(r), 1);
}
