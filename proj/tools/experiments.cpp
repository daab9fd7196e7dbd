#include "experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "lentp/kernel_io.hpp"
#include "lentp/lentp.hpp"

namespace lentp::experiments {

using nlohmann::json;

namespace {

constexpr double pi = std::numbers::pi;

// ---------------------------------------------------------------------------
// formatting

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string num(std::size_t x) { return std::to_string(x); }

Check check_le(std::string name, double value, double threshold) {
    return {std::move(name), value <= threshold, value, threshold, "<="};
}

Check check_ge(std::string name, double value, double threshold) {
    return {std::move(name), value >= threshold, value, threshold, ">="};
}

double z_of(double mean, double target, double se) {
    const double d = mean - target;
    if (se > 0.0) return d / se;
    return d == 0.0 ? 0.0 : std::copysign(INFINITY, d);
}

// ---------------------------------------------------------------------------
// parameter access

TimeGrid grid_of(const json& p) { return {p.at("horizon").get<double>(), p.at("n_steps").get<std::size_t>()}; }

std::uint64_t seed_of(const json& p) { return p.at("seed").get<std::uint64_t>(); }

std::size_t paths_of(const json& p) { return p.at("n_paths").get<std::size_t>(); }

MartingaleKind martingale_of(const std::string& name) {
    if (name == "compensated_poisson" || name == "N_tilde") return MartingaleKind::compensated_poisson;
    if (name == "symmetric_compound_poisson" || name == "M") return MartingaleKind::symmetric_compound_poisson;
    if (name == "brownian_copy") return MartingaleKind::brownian_copy;
    throw ConfigError("unknown martingale '" + name + "'");
}

// ---------------------------------------------------------------------------
// registered functionals

StepFunction reference_h() { return StepFunction({0.0, 0.5, 1.0}, {1.0, 0.5}); }
StepFunction reference_g() { return StepFunction({0.0, 0.25, 1.0}, {-0.5, 1.0}); }

/// Unit-norm two-piece step function on [0,1].
StepFunction unit_h() { return StepFunction({0.0, 0.5, 1.0}, {1.2, std::sqrt(2.0 - 1.44)}); }

/// Reference kernels of orders 1..3: h, sym(h g), sym(h g h).
SimplexKernel reference_kernel(std::size_t order) {
    const auto h = reference_h();
    const auto g = reference_g();
    switch (order) {
        case 1: return SimplexKernel({h});
        case 2: return SimplexKernel({h, g});
        case 3: return SimplexKernel({h, g, h});
        default: break;
    }
    std::vector<StepFunction> fs;
    for (std::size_t i = 0; i < order; ++i) fs.push_back(i % 2 == 0 ? h : g);
    return SimplexKernel(std::move(fs));
}

std::vector<SimplexKernel> kernels_for(const json& p) {
    const auto file = p.at("kernels_file").get<std::string>();
    if (!file.empty()) return load_chaos_file(file).terms();
    std::vector<SimplexKernel> out;
    for (auto n : p.at("orders").get<std::vector<std::size_t>>()) {
        if (n == 0 || n > default_max_order) throw ConfigError("orders must lie in 1.." + std::to_string(default_max_order));
        out.push_back(reference_kernel(n));
    }
    return out;
}

ChaosVector energy_chaos(const json& p) {
    const auto file = p.at("kernels_file").get<std::string>();
    if (!file.empty()) return load_chaos_file(file);
    return ChaosVector(0.3, {reference_kernel(1), reference_kernel(2).scaled(0.5), reference_kernel(3).scaled(0.25)});
}

// ---------------------------------------------------------------------------
// 1. isometry

ExperimentResult run_isometry(const json& p, unsigned workers) {
    const auto grid = grid_of(p);
    const auto seed = seed_of(p);
    const auto n = paths_of(p);
    const double rot = p.at("rotation_theta").get<double>();
    const auto drivers = p.at("drivers").get<std::vector<std::string>>();
    for (const auto& d : drivers) {
        if (d != "B" && d != "N_tilde" && d != "M" && d != "Y_theta") throw ConfigError("unknown driver '" + d + "'");
    }
    const auto kernels = kernels_for(p);
    std::vector<CompiledKernel> compiled;
    for (const auto& k : kernels) compiled.emplace_back(k, grid);

    const std::size_t nk = kernels.size();
    const auto rows = map_paths(n, workers, [&](std::size_t i) {
        const Path b = brownian_path(grid, seed, i);
        const Path nt = martingale_path(MartingaleKind::compensated_poisson, grid, seed, i);
        const Path m = martingale_path(MartingaleKind::symmetric_compound_poisson, grid, seed, i);
        std::vector<double> out;
        out.reserve(drivers.size() * nk);
        for (const auto& d : drivers) {
            const Path y = d == "B" ? b : d == "N_tilde" ? nt : d == "M" ? m : rotate(b, nt, rot);
            for (const auto& k : compiled) {
                const double v = iterated_integral(k, y);
                out.push_back(v * v);
            }
        }
        return out;
    });

    ExperimentResult r;
    r.header = {"driver", "order", "theta", "empirical", "exact", "std_error", "z_score"};
    r.attempted_paths = n;
    std::vector<double> col(n);
    for (std::size_t di = 0; di < drivers.size(); ++di) {
        const double theta = drivers[di] == "B" ? 0.0 : drivers[di] == "Y_theta" ? rot : pi / 2;
        for (std::size_t ki = 0; ki < nk; ++ki) {
            for (std::size_t i = 0; i < n; ++i) col[i] = rows[i][di * nk + ki];
            const auto m = sample_moments(col);
            const double exact = factorial(kernels[ki].order()) * kernels[ki].norm_sq();
            const double z = z_of(m.mean, exact, m.std_error);
            r.rows.push_back({drivers[di], num(kernels[ki].order()), num(theta), num(m.mean), num(exact),
                              num(m.std_error), num(z)});
            r.checks.push_back(
                check_le("isometry " + drivers[di] + " order " + std::to_string(kernels[ki].order()) + " |z|",
                         std::abs(z), 4.0));
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// 2. covariance decay across rotation lag

ExperimentResult run_covariance_decay(const json& p, unsigned workers) {
    const auto grid = grid_of(p);
    const auto seed = seed_of(p);
    const auto n = paths_of(p);
    const auto phis = p.at("phis").get<std::vector<double>>();
    const auto kind = martingale_of(p.at("martingale").get<std::string>());
    const auto kernels = kernels_for(p);
    std::vector<CompiledKernel> compiled;
    for (const auto& k : kernels) compiled.emplace_back(k, grid);
    const std::size_t nk = kernels.size();

    const auto rows = map_paths(n, workers, [&](std::size_t i) {
        const Path b = brownian_path(grid, seed, i);
        const Path m = martingale_path(kind, grid, seed, i);
        std::vector<double> base(nk);
        for (std::size_t k = 0; k < nk; ++k) base[k] = iterated_integral(compiled[k], b);
        std::vector<double> out;
        out.reserve(phis.size() * nk);
        for (double phi : phis) {
            const Path y = rotate(b, m, phi);
            for (std::size_t k = 0; k < nk; ++k) out.push_back(iterated_integral(compiled[k], y) * base[k]);
        }
        return out;
    });

    ExperimentResult r;
    r.header = {"order", "phi", "empirical", "exact", "std_error", "z_score"};
    r.attempted_paths = n;
    std::vector<double> col(n);
    for (std::size_t ki = 0; ki < nk; ++ki) {
        const auto order = kernels[ki].order();
        const double scale = factorial(order) * kernels[ki].norm_sq();
        for (std::size_t a = 0; a < phis.size(); ++a) {
            for (std::size_t i = 0; i < n; ++i) col[i] = rows[i][a * nk + ki] / scale;
            const auto m = sample_moments(col);
            const double exact = std::pow(std::cos(phis[a]), static_cast<double>(order));
            const double z = z_of(m.mean, exact, m.std_error);
            r.rows.push_back({num(order), num(phis[a]), num(m.mean), num(exact), num(m.std_error), num(z)});
            r.checks.push_back(check_le("cos^n decay order " + std::to_string(order) + " phi " + num(phis[a]) + " |z|",
                                        std::abs(z), 4.0));
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// 3. Bessel spectrum, Parseval and Fourier identities

ExperimentResult run_bessel(const json& p, unsigned) {
    const auto xs = p.at("h_norm_sq").get<std::vector<double>>();
    const auto phis = p.at("phis").get<std::vector<double>>();
    const long n_max_param = p.at("n_max").get<long>();
    const double tol = p.at("tol").get<double>();

    ExperimentResult r;
    r.header = {"h_norm_sq", "n", "c_n_sq"};
    json identities = json::array();
    for (double x : xs) {
        const long n_max = n_max_param < 0 ? default_truncation(x) : n_max_param;
        const auto spec = bessel_spectrum(x, n_max, tol);
        for (std::size_t k = 0; k < spec.coefficients.size(); ++k) {
            r.rows.push_back({num(x), num(k), num(spec.coefficients[k])});
        }
        const double parseval = std::abs(spec.total_mass() - std::exp(x));
        r.checks.push_back(check_le("parseval |sum c_n^2 - e^x| at x=" + num(x), parseval, 1e-10));
        identities.push_back({{"h_norm_sq", x}, {"identity", "parseval"}, {"abs_error", parseval}});
        if (x == 1.0 || xs.size() == 1) {
            for (double phi : phis) {
                const double err = std::abs(spec.fourier(phi) - std::exp(x * std::cos(phi)));
                r.checks.push_back(check_le("fourier at x=" + num(x) + " phi=" + num(phi), err, 1e-8));
                identities.push_back({{"h_norm_sq", x}, {"identity", "fourier"}, {"phi", phi}, {"abs_error", err}});
            }
        }
    }
    r.notes["identities"] = identities;
    return r;
}

// ---------------------------------------------------------------------------
// 4. exponential-vector covariance curve

ExperimentResult run_exp_vector(const json& p, unsigned workers) {
    const auto grid = grid_of(p);
    const double x = p.at("h_norm_sq").get<double>();
    if (!(x >= 0.0)) throw ConfigError("h_norm_sq must be non-negative");
    const auto h = StepFunction::indicator(0.0, grid.horizon(), std::sqrt(x / grid.horizon()));
    const auto kind = martingale_of(p.at("martingale").get<std::string>());
    const ExponentialVector ev(h, StepFunction{}, grid, kind);
    CovarianceConfig cfg{grid, paths_of(p), seed_of(p), kind, 0.0, workers};
    const auto phis = p.at("phis").get<std::vector<double>>();
    const auto curve = covariance_curve(ev, phis, cfg);

    ExperimentResult r;
    r.header = {"phi", "empirical", "exact", "std_error", "z_score"};
    r.attempted_paths = cfg.n_paths;
    for (const auto& pt : curve) {
        const double exact = std::exp(x * std::cos(pt.phi));
        const double z = z_of(pt.mean, exact, pt.std_error);
        r.rows.push_back({num(pt.phi), num(pt.mean), num(exact), num(pt.std_error), num(z)});
        r.checks.push_back(check_le("exp(|h|^2 cos phi) at phi " + num(pt.phi) + " |z|", std::abs(z), 4.0));
    }
    return r;
}

// ---------------------------------------------------------------------------
// 5. finite-chaos energy E[(F^sharp)^2] = sum n n! |f_n|^2

ExperimentResult run_chaos_energy(const json& p, unsigned workers) {
    const auto grid = grid_of(p);
    const auto seed = seed_of(p);
    const auto n = paths_of(p);
    const double theta = p.at("theta").get<double>();
    const auto chaos = energy_chaos(p);
    const CompiledChaos cf(chaos, grid);
    const double exact = chaos.energy();
    const auto drivers = p.at("drivers").get<std::vector<std::string>>();

    ExperimentResult r;
    r.header = {"driver", "method", "theta", "empirical", "exact", "std_error", "z_score"};
    r.attempted_paths = n * drivers.size();
    for (const auto& dname : drivers) {
        const auto kind = martingale_of(dname);
        const auto rows = map_paths(n, workers, [&](std::size_t i) {
            const Path b = brownian_path(grid, seed, i);
            const Path m = martingale_path(kind, grid, seed, i);
            const double by_rotation = gradient_chaos(cf, b, m, theta);
            const double by_derivative = gradient_integral(cf, b, m);
            return std::array<double, 2>{by_rotation * by_rotation, by_derivative * by_derivative};
        });
        for (std::size_t method = 0; method < 2; ++method) {
            std::vector<double> col(n);
            for (std::size_t i = 0; i < n; ++i) col[i] = rows[i][method];
            const auto m = sample_moments(col);
            const double z = z_of(m.mean, exact, m.std_error);
            const std::string mname = method == 0 ? "rotation_difference" : "derivative_integral";
            r.rows.push_back({dname, mname, num(method == 0 ? theta : 0.0), num(m.mean), num(exact), num(m.std_error),
                              num(z)});
            r.checks.push_back(check_le("energy " + dname + " " + mname + " |z|", std::abs(z), 4.0));
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// 6. SDE lent particle versus flow oracle

std::vector<std::string> sde_names(const json& p) {
    const auto name = p.at("sde").get<std::string>();
    if (name == "all") return sde_registry_names();
    make_sde(name);  // validates the name
    return {name};
}

SdeSpec sde_from(const std::string& name, const json& p) {
    SdeParameters params;
    if (name == "gbm") {
        params = {{"sigma", p.at("sigma").get<double>()}, {"b", p.at("b").get<double>()}};
    } else if (name == "additive") {
        params = {{"c", p.at("c").get<double>()}, {"b", p.at("b").get<double>()}};
    } else {
        params = {{"amplitude", p.at("amplitude").get<double>()}, {"offset", p.at("offset").get<double>()}};
    }
    return make_sde(name, params);
}

double rel_err(double estimate, double oracle) { return std::abs(estimate - oracle) / (std::abs(oracle) + 1e-8); }

ExperimentResult run_sde_lent_particle(const json& p, unsigned workers) {
    const auto grid = grid_of(p);
    const auto seed = seed_of(p);
    const auto n = paths_of(p);
    const double theta = p.at("theta").get<double>();
    const auto us = p.at("u").get<std::vector<double>>();
    const auto ts = p.at("t").get<std::vector<double>>();
    for (double u : us)
        for (double t : ts)
            if (!(u > 0.0 && u <= t && t <= grid.horizon())) throw ConfigError("need 0 < u <= t <= T for every pair");
    std::vector<std::size_t> t_index;
    for (double t : ts) t_index.push_back(grid.snap_forward(t));

    ExperimentResult r;
    r.header = {"sde", "path", "u", "t", "method", "estimate", "oracle", "rel_err"};
    const std::size_t pairs = us.size() * ts.size();
    for (const auto& name : sde_names(p)) {
        const auto spec = sde_from(name, p);
        struct Row {
            bool ok = false;
            std::vector<double> est, ora;
        };
        const auto rows = map_paths(n, workers, [&](std::size_t i) {
            Row row;
            const Path b = brownian_path(grid, seed, i);
            try {
                const auto states = solve_sde(spec, b);
                const auto flow = first_variation(spec, b, states);
                for (double u : us) {
                    const auto lp = lent_particle_profile(spec, b, states, u, theta);
                    const auto fo = flow_oracle_profile(spec, b, states, flow, u);
                    for (auto m : t_index) {
                        row.est.push_back(lp.values[m]);
                        row.ora.push_back(fo.values[m]);
                    }
                }
                row.ok = true;
            } catch (const NumericalBlowup&) {
            } catch (const SingularFlow&) {
            }
            return row;
        });
        std::size_t within = 0, total = 0, excluded = 0;
        double worst_rel = 0.0, worst_abs = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!rows[i].ok) {
                ++excluded;
                continue;
            }
            for (std::size_t q = 0; q < pairs; ++q) {
                const double e = rows[i].est[q];
                const double o = rows[i].ora[q];
                const double re = rel_err(e, o);
                worst_rel = std::max(worst_rel, re);
                worst_abs = std::max(worst_abs, std::abs(e - o));
                within += re <= 1e-2 ? 1 : 0;
                ++total;
                r.rows.push_back({name, num(i), num(us[q / ts.size()]), num(ts[q % ts.size()]), "jump_difference",
                                  num(e), num(o), num(re)});
            }
        }
        r.attempted_paths += n;
        r.excluded_paths += excluded;
        const double frac = total == 0 ? 0.0 : static_cast<double>(within) / static_cast<double>(total);
        r.checks.push_back(check_ge(name + " fraction with rel_err <= 1e-2", frac, 0.99));
        if (name == "additive") r.checks.push_back(check_le(name + " max |estimate - oracle|", worst_abs, 1e-10));
        r.notes[name] = {{"max_rel_err", worst_rel}, {"max_abs_err", worst_abs}, {"excluded_paths", excluded}};
    }
    return r;
}

// ---------------------------------------------------------------------------
// 7. lent particle through the symmetric compound Poisson rotation

ExperimentResult run_sde_poisson(const json& p, unsigned workers) {
    const auto grid = grid_of(p);
    const auto seed = seed_of(p);
    const auto n = paths_of(p);
    const double theta = p.at("theta").get<double>();
    const double t = p.at("t").get<double>();
    if (!(t > 0.0 && t <= grid.horizon())) throw ConfigError("t must lie in (0, T]");
    const std::size_t m = grid.snap_forward(t);

    ExperimentResult r;
    r.header = {"sde", "path", "jump_time", "mark", "estimate", "debiased", "oracle", "rel_err"};
    std::size_t single_jump_paths = 0;
    bool counted = false;
    for (const auto& name : sde_names(p)) {
        const auto spec = sde_from(name, p);
        struct Row {
            int status = 0;  // 0 skipped, 1 ok, 2 blow-up
            double u = 0.0, mark = 0.0, estimate = 0.0, debiased = 0.0, oracle = 0.0;
        };
        const auto rows = map_paths(n, workers, [&](std::size_t i) {
            Row row;
            const Path b = brownian_path(grid, seed, i);
            const Path mart = martingale_path(MartingaleKind::symmetric_compound_poisson, grid, seed, i);
            try {
                const auto g = lent_particle_sde_poisson(spec, b, mart, true, theta, t);
                if (g.skipped) return row;
                row.u = g.estimate.u;
                row.mark = g.mark;
                row.estimate = g.estimate.value;
                row.debiased = g.debiased;
                if (g.jump_index > m) {
                    row.oracle = 0.0;
                } else {
                    const auto states = solve_sde(spec, b);
                    const auto flow = first_variation(spec, b, states);
                    row.oracle = flow_oracle_profile(spec, b, states, flow, row.u).values[m];
                }
                row.status = 1;
            } catch (const NumericalBlowup&) {
                row.status = 2;
            } catch (const SingularFlow&) {
                row.status = 2;
            }
            return row;
        });
        std::size_t within = 0, total = 0, excluded = 0;
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (rows[i].status == 2) ++excluded;
            if (rows[i].status != 1) continue;
            const double re = rel_err(rows[i].debiased, rows[i].oracle);
            worst = std::max(worst, re);
            within += re <= 1e-2 ? 1 : 0;
            ++total;
            r.rows.push_back({name, num(i), num(rows[i].u), num(rows[i].mark), num(rows[i].estimate),
                              num(rows[i].debiased), num(rows[i].oracle), num(re)});
        }
        if (!counted) {
            single_jump_paths = total + excluded;
            counted = true;
        }
        r.attempted_paths += n;
        r.excluded_paths += excluded;
        const double frac = total == 0 ? 0.0 : static_cast<double>(within) / static_cast<double>(total);
        r.checks.push_back(check_ge(name + " fraction with rel_err <= 1e-2 (single-jump paths)", frac, 0.99));
        r.notes[name] = {{"single_jump_paths", total}, {"max_rel_err", worst}, {"excluded_paths", excluded}};
    }
    const double freq = static_cast<double>(single_jump_paths) / static_cast<double>(n);
    const double se = std::sqrt(freq * (1.0 - freq) / static_cast<double>(n));
    const double z = z_of(freq, std::exp(-1.0), se);
    r.checks.push_back(check_le("single-jump frequency vs e^-1 |z|", std::abs(z), 4.0));
    r.notes["single_jump_frequency"] = {{"empirical", freq}, {"exact", std::exp(-1.0)}, {"std_error", se}};
    return r;
}

// ---------------------------------------------------------------------------
// 8. integration by parts

struct IbpPair {
    std::string name;
    ChaosVector f;
    StepFunction g;
};

std::vector<IbpPair> ibp_pairs(double horizon) {
    const auto one = StepFunction::indicator(0.0, horizon);
    const auto h = unit_h();
    const auto h2 = SimplexKernel::power(h, 2);
    return {
        {"B_T,G=1", ChaosVector(0.0, {SimplexKernel({one})}), one},
        {"I2(h*h),G=h", ChaosVector(0.0, {h2}), h},
        // (int h dB)^2 = I_2(h (x) h) + |h|^2
        {"(int h dB)^2,G=1", ChaosVector(h.norm_sq(), {h2}), one},
    };
}

ExperimentResult run_ibp(const json& p, unsigned workers) {
    const IbpConfig cfg{grid_of(p), paths_of(p), seed_of(p), workers};
    ExperimentResult r;
    r.header = {"pair", "lhs", "rhs", "pooled_std_error", "z_score"};
    for (const auto& pair : ibp_pairs(cfg.grid.horizon())) {
        const auto res = integration_by_parts_check(pair.f, pair.g, cfg);
        const double z = z_of(res.lhs - res.rhs, 0.0, res.pooled_std_error);
        r.rows.push_back({pair.name, num(res.lhs), num(res.rhs), num(res.pooled_std_error), num(z)});
        r.checks.push_back(check_le("ibp " + pair.name + " |lhs-rhs|/pooled_se", std::abs(z), 4.0));
        r.attempted_paths += cfg.n_paths;
    }
    return r;
}

// ---------------------------------------------------------------------------
// 9. Mehler / Ornstein-Uhlenbeck suite

ExperimentResult run_mehler(const json& p, unsigned workers) {
    const auto grid = grid_of(p);
    const auto seed = seed_of(p);
    const double theta = p.at("theta").get<double>();
    ExperimentResult r;
    r.header = {"functional", "quantity", "t", "estimate", "std_error", "target"};

    // Gamma[B_T] = 1
    {
        const auto outer = p.at("gamma_outer_paths").get<std::size_t>();
        const InnerStreams proto{seed, 0, p.at("gamma_inner_paths").get<std::size_t>(), false};
        const auto f = [](const Path& b) { return b.terminal(); };
        const auto vals = map_paths(outer, workers, [&](std::size_t i) {
            const Path b = brownian_path(grid, seed, i);
            InnerStreams in = proto;
            in.outer_index = i;
            return carre_du_champ(f, b, in, theta).mean;
        });
        const auto m = sample_moments(vals);
        r.rows.push_back({"B_T", "gamma_rotation", num(0.0), num(m.mean), num(m.std_error), num(grid.horizon())});
        r.checks.push_back(check_le("Gamma[B_T] |z| vs T", std::abs(z_of(m.mean, grid.horizon(), m.std_error)), 4.0));
        r.attempted_paths += outer;
    }

    const auto h = unit_h();
    const CompiledChaos i1(ChaosVector(0.0, {SimplexKernel({h})}), grid);
    const CompiledChaos i2(ChaosVector(0.0, {SimplexKernel::power(h, 2)}), grid);

    // P_t I_n = e^{-n t / 2} I_n, path by path
    {
        const auto outer = p.at("eigen_outer_paths").get<std::size_t>();
        const auto inner_n = p.at("eigen_inner_paths").get<std::size_t>();
        const double t = p.at("eigen_t").get<double>();
        for (int order = 1; order <= 2; ++order) {
            const CompiledChaos& f = order == 1 ? i1 : i2;
            const double factor = std::exp(-0.5 * order * t);
            struct Row {
                double z = 0.0, value = 0.0, se = 0.0, target = 0.0;
            };
            const auto rows = map_paths(outer, workers, [&](std::size_t i) {
                const Path b = brownian_path(grid, seed, i);
                const InnerStreams in{seed + 7919ULL * static_cast<std::uint64_t>(order), i, inner_n, false};
                const auto est = mehler_semigroup(f, b, t, in);
                Row row;
                row.value = est.mean;
                row.se = est.std_error;
                row.target = factor * f(b);
                row.z = z_of(est.mean, row.target, est.std_error);
                return row;
            });
            std::size_t ok = 0;
            double worst = 0.0;
            for (std::size_t i = 0; i < outer; ++i) {
                ok += std::abs(rows[i].z) <= 4.0 ? 1 : 0;
                worst = std::max(worst, std::abs(rows[i].z));
                r.rows.push_back({"I" + std::to_string(order) + "[path " + std::to_string(i) + "]", "P_t F", num(t),
                                  num(rows[i].value), num(rows[i].se), num(rows[i].target)});
            }
            const double frac = static_cast<double>(ok) / static_cast<double>(outer);
            r.checks.push_back(check_ge("P_t I" + std::to_string(order) + " = e^{-nt/2} I" + std::to_string(order) +
                                            ": fraction of paths within 4 inner se",
                                        frac, 0.99));
            r.notes["eigen_order_" + std::to_string(order)] = {{"max_abs_z", worst}};
            r.attempted_paths += outer;
        }
    }

    // Semigroup bracket limit versus the rotation carre du champ, F = I_2(h h)
    {
        const auto outer = p.at("limit_outer_paths").get<std::size_t>();
        const auto inner_n = p.at("limit_inner_paths").get<std::size_t>();
        const auto ts = p.at("limit_t").get<std::vector<double>>();
        struct Row {
            double rotation = 0.0, extrapolated = 0.0;
            std::vector<double> brackets;
        };
        const auto rows = map_paths(outer, workers, [&](std::size_t i) {
            const Path b = brownian_path(grid, seed, i);
            const InnerStreams in{seed + 104729ULL, i, inner_n, true};
            Row row;
            row.rotation = carre_du_champ(i2, b, in, theta).mean;
            const auto br = semigroup_limit_gamma(i2, b, ts, in);
            for (const auto& e : br) row.brackets.push_back(e.mean);
            row.extrapolated = extrapolate_gamma(ts, br);
            return row;
        });
        std::vector<double> rot(outer), ex(outer);
        for (std::size_t i = 0; i < outer; ++i) {
            rot[i] = rows[i].rotation;
            ex[i] = rows[i].extrapolated;
        }
        const double energy = ChaosVector(0.0, {SimplexKernel::power(h, 2)}).energy();
        const auto m8 = sample_moments(rot);
        const auto mx = sample_moments(ex);
        for (std::size_t q = 0; q < ts.size(); ++q) {
            std::vector<double> col(outer);
            for (std::size_t i = 0; i < outer; ++i) col[i] = rows[i].brackets[q];
            const auto mq = sample_moments(col);
            r.rows.push_back({"I2", "gamma_bracket", num(ts[q]), num(mq.mean), num(mq.std_error), num(energy)});
        }
        r.rows.push_back({"I2", "gamma_bracket_extrapolated", num(0.0), num(mx.mean), num(mx.std_error), num(energy)});
        r.rows.push_back({"I2", "gamma_rotation", num(0.0), num(m8.mean), num(m8.std_error), num(energy)});
        r.checks.push_back(check_le("bracket limit (extrapolated) vs rotation Gamma: |diff| / se",
                                    std::abs(mx.mean - m8.mean) / m8.std_error, 3.0));
        r.checks.push_back(check_le("E Gamma[I2] vs sum n n! |f_n|^2 |z|", std::abs(z_of(m8.mean, energy, m8.std_error)),
                                    4.0));
        r.attempted_paths += outer;
    }
    return r;
}

// ---------------------------------------------------------------------------
// 10. running supremum

ExperimentResult run_supremum(const json& p, unsigned workers) {
    const auto grid = grid_of(p);
    const auto seed = seed_of(p);
    const auto n = paths_of(p);
    const double u = p.at("u").get<double>();
    const double a = p.at("a").get<double>();
    const auto k_name = p.at("k").get<std::string>();
    if (k_name != "zero" && k_name != "compensated_poisson") throw ConfigError("unknown K process '" + k_name + "'");
    if (!(a > 0.0)) throw ConfigError("a must be positive");
    (void)grid.snap_forward(u);

    struct Row {
        double value = 0.0;
        int tie = 0;
    };
    const auto rows = map_paths(n, workers, [&](std::size_t i) {
        const Path b = brownian_path(grid, seed, i);
        const Path k = k_name == "zero"
                           ? Path(grid)
                           : simulate_compensated_poisson(grid, RngStream{seed, i, StreamFamily::auxiliary});
        const auto g = supremum_gradient(k, b, u, a);
        return Row{g.value, g.tie ? 1 : 0};
    });

    ExperimentResult r;
    r.header = {"path", "quotient", "tie"};
    r.attempted_paths = n;
    std::vector<double> values;
    std::size_t ties = 0, off_plateau = 0;
    for (std::size_t i = 0; i < n; ++i) {
        r.rows.push_back({num(i), num(rows[i].value), num(static_cast<std::size_t>(rows[i].tie))});
        if (rows[i].tie) {
            ++ties;
            continue;
        }
        const double v = rows[i].value;
        if (!(std::abs(v) <= 1e-9 || std::abs(v - 1.0) <= 1e-9)) ++off_plateau;
        values.push_back(std::round(v));
    }
    r.checks.push_back(check_le("non-tied quotients off {0,1}", static_cast<double>(off_plateau), 0.0));
    const auto m = sample_moments(values);
    if (k_name == "zero") {
        r.checks.push_back(check_le("mean quotient vs 1/2 |z|", std::abs(z_of(m.mean, 0.5, m.std_error)), 4.0));
    }
    r.notes["ties"] = ties;
    r.notes["mean"] = m.mean;
    r.notes["std_error"] = m.std_error;
    return r;
}

// ---------------------------------------------------------------------------
// path export (debugging aid)

ExperimentResult run_export_path(const json& p, unsigned) {
    const auto grid = grid_of(p);
    const auto seed = seed_of(p);
    const auto index = p.at("path_index").get<std::uint64_t>();
    const auto kind = martingale_of(p.at("martingale").get<std::string>());
    const double theta = p.at("rotation_theta").get<double>();
    const Path b = brownian_path(grid, seed, index);
    const Path m = martingale_path(kind, grid, seed, index);
    const Path y = rotate(b, m, theta);
    ExperimentResult r;
    r.header = {"t", "B", "M", "Y_theta"};
    for (std::size_t k = 0; k <= grid.n_steps(); ++k) {
        r.rows.push_back({num(grid.time(k)), num(b.level(k)), num(m.level(k)), num(y.level(k))});
    }
    return r;
}

// ---------------------------------------------------------------------------
// 11. reproducibility across runs and worker counts

json reduced_overrides(const std::string& name) {
    if (name == "sde-lent-particle") return {{"n_paths", 20}, {"n_steps", 2000}};
    if (name == "sde-poisson") return {{"n_paths", 60}, {"n_steps", 2000}};
    if (name == "mehler") {
        return {{"gamma_outer_paths", 40},  {"gamma_inner_paths", 20},  {"eigen_outer_paths", 8},
                {"eigen_inner_paths", 200}, {"limit_outer_paths", 10}, {"limit_inner_paths", 20}};
    }
    if (name == "bessel") return json::object();
    return {{"n_paths", 2000}, {"n_steps", 200}};
}

ExperimentResult run_reproducibility(const json& p, unsigned) {
    const auto wide = p.at("workers_wide").get<unsigned>();
    const bool full_size = p.at("full_size").get<bool>();
    ExperimentResult r;
    r.header = {"experiment", "csv_bytes", "identical_across_runs", "identical_across_workers"};
    for (const auto& info : registry()) {
        if (info.name == "reproducibility" || info.name == "export-path") continue;
        const json sizes = full_size ? json::object() : reduced_overrides(info.name);
        ExperimentConfig cfg{info.name, resolve_params(info.name, json::object(), sizes), 1};
        cfg.params["seed"] = p.at("seed");
        const auto render = [&](unsigned w) {
            cfg.workers = w;
            const auto res = run_experiment(cfg);
            return render_csv(res) + "\n" + render_summary(cfg, res).dump(2);
        };
        const auto narrow = render(1);
        const auto wide_a = render(wide);
        const auto wide_b = render(wide);
        const bool runs = wide_a == wide_b;
        const bool workers_same = narrow == wide_a;
        r.rows.push_back({info.name, num(narrow.size()), runs ? "1" : "0", workers_same ? "1" : "0"});
        r.checks.push_back({info.name + " byte-identical (runs, 1 vs " + std::to_string(wide) + " workers)",
                            runs && workers_same, runs && workers_same ? 1.0 : 0.0, 1.0, "=="});
    }
    return r;
}

// ---------------------------------------------------------------------------

json common(std::size_t n_paths, std::size_t n_steps) {
    return {{"horizon", 1.0}, {"n_steps", n_steps}, {"n_paths", n_paths}, {"seed", 20240601}};
}

json with(json base, const json& extra) {
    for (const auto& [k, v] : extra.items()) base[k] = v;
    return base;
}

std::vector<ExperimentInfo> build_registry() {
    const json phis = {0.0, pi / 6, pi / 4, pi / 3, pi / 2};
    std::vector<ExperimentInfo> reg;
    reg.push_back({"isometry", "E[I_n(f_n)^2] = n! |f_n|^2 for drivers B, N_tilde, M and Y_theta",
                   with(common(100000, 1000), {{"orders", {1, 2, 3}},
                                               {"drivers", {"B", "N_tilde", "M", "Y_theta"}},
                                               {"rotation_theta", 0.7},
                                               {"kernels_file", ""}}),
                   run_isometry});
    reg.push_back({"covariance-decay", "E[I_n^phi(f) I_n^0(f)] / (n! |f|^2) = cos^n(phi)",
                   with(common(100000, 1000),
                        {{"orders", {1, 2, 3}}, {"phis", phis}, {"martingale", "compensated_poisson"}, {"kernels_file", ""}}),
                   run_covariance_decay});
    reg.push_back({"bessel", "spectral masses c_n^2: Parseval sum = e^{|h|^2}, Fourier sum = exp(|h|^2 cos phi)",
                   {{"h_norm_sq", {0.5, 1.0, 4.0, 10.0}},
                    {"n_max", -1},
                    {"tol", 1e-17},
                    {"phis", {0.0, pi / 4, pi / 2, pi}}},
                   run_bessel});
    reg.push_back({"exp-vector-covariance", "exponential vector: E[H^phi H^0] = exp(|h|^2 cos phi)",
                   with(common(100000, 1000), {{"h_norm_sq", 1.0}, {"phis", phis}, {"martingale", "compensated_poisson"}}),
                   run_exp_vector});
    reg.push_back({"chaos-energy", "E[(F^sharp)^2] = sum n n! |f_n|^2 for a three-term chaos vector",
                   with(common(100000, 1000), {{"theta", 1e-3},
                                               {"drivers", {"compensated_poisson", "symmetric_compound_poisson"}},
                                               {"kernels_file", ""}}),
                   run_chaos_energy});
    reg.push_back({"sde-lent-particle", "SDE: jump-difference D_u X_t versus the flow oracle on a 5x5 (u,t) grid",
                   with(common(1000, 10000), {{"theta", 1e-4},
                                              {"sde", "all"},
                                              {"sigma", 0.3},
                                              {"b", 0.1},
                                              {"c", 0.5},
                                              {"amplitude", 1.0},
                                              {"offset", 2.0},
                                              {"u", {0.1, 0.2, 0.3, 0.4, 0.5}},
                                              {"t", {0.6, 0.7, 0.8, 0.9, 1.0}}}),
                   run_sde_lent_particle});
    reg.push_back({"sde-poisson", "SDE: rotation into a symmetric compound Poisson martingale, single-jump paths",
                   with(common(3000, 10000), {{"theta", 1e-4},
                                              {"t", 1.0},
                                              {"sde", "all"},
                                              {"sigma", 0.3},
                                              {"b", 0.1},
                                              {"c", 0.5},
                                              {"amplitude", 1.0},
                                              {"offset", 2.0}}),
                   run_sde_poisson});
    reg.push_back({"integration-by-parts", "E[F int G dB] = E[int D_u F G_u du] for three (F, G) pairs",
                   common(100000, 1000), run_ibp});
    reg.push_back({"mehler", "Ornstein-Uhlenbeck: Gamma[B_T], P_t eigenvalues, semigroup bracket limit",
                   with(common(0, 100), {{"theta", 1e-3},
                                         {"gamma_outer_paths", 2000},
                                         {"gamma_inner_paths", 100},
                                         {"eigen_outer_paths", 100},
                                         {"eigen_inner_paths", 10000},
                                         {"eigen_t", 0.5},
                                         {"limit_outer_paths", 200},
                                         {"limit_inner_paths", 200},
                                         {"limit_t", {0.1, 0.01, 0.001}}}),
                   run_mehler});
    reg.push_back({"supremum", "sup of B + K: jump-difference quotient is 0 or 1; mean 1/2 at u = 1/2",
                   with(common(100000, 1000), {{"u", 0.5}, {"a", 1e-4}, {"k", "zero"}}), run_supremum});
    reg.push_back({"reproducibility", "every experiment byte-identical across runs and worker counts",
                   {{"seed", 20240601}, {"workers_wide", 8}, {"full_size", false}}, run_reproducibility});
    reg.push_back({"export-path", "write one (t, B, M, Y_theta) path for inspection",
                   with(common(1, 1000), {{"path_index", 0}, {"martingale", "compensated_poisson"}, {"rotation_theta", 0.7}}),
                   run_export_path});
    // mehler does not use n_paths
    reg[8].defaults.erase("n_paths");
    return reg;
}

void validate(const json& p) {
    if (p.contains("horizon") && !(p["horizon"].get<double>() > 0.0)) throw ConfigError("horizon must be positive");
    if (p.contains("n_steps") && p["n_steps"].get<long long>() < 1) throw ConfigError("n_steps must be at least 1");
    if (p.contains("n_paths") && p["n_paths"].get<long long>() < 1) throw ConfigError("n_paths must be positive");
    if (p.contains("theta") && !(p["theta"].get<double>() > 0.0)) throw ConfigError("theta must be positive");
    for (const char* key : {"gamma_outer_paths", "gamma_inner_paths", "eigen_outer_paths", "eigen_inner_paths",
                            "limit_outer_paths", "limit_inner_paths", "workers_wide"}) {
        if (p.contains(key) && p[key].get<long long>() < 2) throw ConfigError(std::string(key) + " must be at least 2");
    }
    if (p.contains("seed") && !(p["seed"].is_number_integer() && p["seed"].get<long long>() >= 0)) throw ConfigError("seed must be a non-negative integer");
}

bool same_kind(const json& a, const json& b) {
    if (a.is_number() && b.is_number()) return true;
    return a.type() == b.type();
}

}  // namespace

bool ExperimentResult::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

double ExperimentResult::exclusion_rate() const {
    return attempted_paths == 0 ? 0.0 : static_cast<double>(excluded_paths) / static_cast<double>(attempted_paths);
}

const std::vector<ExperimentInfo>& registry() {
    static const std::vector<ExperimentInfo> reg = build_registry();
    return reg;
}

const ExperimentInfo& find_experiment(const std::string& name) {
    for (const auto& e : registry())
        if (e.name == name) return e;
    throw ConfigError("unknown experiment '" + name + "'");
}

std::vector<const ExperimentInfo*> list_experiments(const std::string& filter) {
    std::vector<const ExperimentInfo*> out;
    for (const auto& e : registry())
        if (filter.empty() || e.name.find(filter) != std::string::npos) out.push_back(&e);
    return out;
}

json resolve_params(const std::string& experiment, const json& file_params, const json& overrides) {
    const auto& info = find_experiment(experiment);
    json p = info.defaults;
    for (const json* layer : {&file_params, &overrides}) {
        if (layer->is_null()) continue;
        if (!layer->is_object()) throw ConfigError("parameters must be a JSON object");
        for (const auto& [k, v] : layer->items()) {
            if (!p.contains(k)) throw ConfigError("experiment '" + experiment + "' has no parameter '" + k + "'");
            if (!same_kind(p[k], v)) throw ConfigError("parameter '" + k + "' has the wrong type");
            p[k] = v;
        }
    }
    try {
        validate(p);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid parameter: ") + e.what());
    }
    return p;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    const auto& info = find_experiment(config.experiment);
    try {
        return info.run(config.params, std::max(1u, config.workers));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid parameter: ") + e.what());
    }
}

std::string render_csv(const ExperimentResult& result) {
    std::string out;
    const auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(result.header);
    for (const auto& row : result.rows) line(row);
    return out;
}

json render_summary(const ExperimentConfig& config, const ExperimentResult& result) {
    json checks = json::array();
    for (const auto& c : result.checks) {
        checks.push_back({{"name", c.name},
                          {"passed", c.passed},
                          {"value", c.value},
                          {"threshold", c.threshold},
                          {"relation", c.relation}});
    }
    return {{"experiment", config.experiment},
            {"library_version", lentp::version},
            {"parameters", config.params},
            {"checks", checks},
            {"passed", result.all_passed()},
            {"attempted_paths", result.attempted_paths},
            {"excluded_paths", result.excluded_paths},
            {"notes", result.notes}};
}

int exit_status(const ExperimentResult& result) {
    if (result.exclusion_rate() > max_exclusion_rate) return 3;
    return result.all_passed() ? 0 : 1;
}

}  // namespace lentp::experiments
