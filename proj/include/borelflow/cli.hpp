// SPDX-License-Identifier: Apache-2.0

#ifndef BORELFLOW_CLI_HPP
#define BORELFLOW_CLI_HPP

#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "borelflow/io.hpp"
#include "borelflow/parallel.hpp"

namespace borelflow {

namespace cli_detail {

struct Context {
    RunConfig cfg;
    ProblemData data;
    std::string out_dir;

    std::string path(const char* name) const { return out_dir + "/" + name; }
};

inline Context make_context(const std::string& config_path, const std::string& out_dir,
                            int order_override, double pmax_override, int workers_override) {
    Context ctx{load_config(config_path), ProblemData{}, out_dir};
    if (order_override >= 0) {
        ctx.cfg.series_order = order_override;
        ctx.cfg.march_seed_order = std::max(order_override, 1);
    }
    if (pmax_override > 0.0) ctx.cfg.grid_p_max = pmax_override;
    if (workers_override > 0) ctx.cfg.workers = workers_override;
    ctx.cfg.workers = resolve_workers(ctx.cfg.workers);
    convolution_workers().store(ctx.cfg.workers);
    ctx.data = build_problem_data(ctx.cfg);
    std::filesystem::create_directories(out_dir);
    return ctx;
}

inline BorelTaylorSeries make_series(const Context& ctx, int order) {
    const auto& d = ctx.data;
    return ctx.cfg.problem == Problem::boussinesq
               ? series_boussinesq(d.primary, d.companion, d.forcing, ctx.cfg.params, order)
               : series_mhd(d.primary, d.companion, d.forcing, ctx.cfg.params, order);
}

inline BorelSolution run_march(const Context& ctx) {
    const auto& d = ctx.data;
    const BorelGrid grid = ctx.cfg.make_grid();
    return ctx.cfg.problem == Problem::boussinesq
               ? march_boussinesq(d.primary, d.companion, d.forcing, ctx.cfg.params, grid,
                                  ctx.cfg.march_seed_order, ctx.cfg.march_tol)
               : march_mhd(d.primary, d.companion, d.forcing, ctx.cfg.params, grid,
                           ctx.cfg.march_seed_order, ctx.cfg.march_tol);
}

inline std::pair<double, double> data_norms(const Context& ctx) {
    const auto& d = ctx.data;
    FlowState st(ctx.cfg.problem, ctx.cfg.lattice);
    st.primary = d.primary;
    st.companion = d.companion;
    const auto fc = ctx.cfg.problem == Problem::boussinesq
                        ? first_coeff_boussinesq(st, d.forcing, ctx.cfg.params)
                        : first_coeff_mhd(st, d.forcing, ctx.cfg.params);
    return {field_norm(d.primary, d.companion, ctx.cfg.norm),
            field_norm(fc.first, fc.second, ctx.cfg.norm)};
}

inline double support_kmax(const ProblemData& d) {
    double kmax = 0.0;
    for (const SpectralField* f : {&d.primary, &d.companion, &d.forcing}) {
        const double tol = 1e-300;
        for (std::size_t i = 0; i < f->lattice.size(); ++i)
            if (f->mode_mag(i) > tol) kmax = std::max(kmax, f->lattice.kmag(i));
    }
    return kmax;
}

inline int cmd_series(const Context& ctx) {
    // order 0 still emits the leading pair (u1, theta1) as the l = 0 row
    BorelTaylorSeries s = make_series(ctx, std::max(1, ctx.cfg.series_order));
    if (ctx.cfg.series_order == 0) {
        s.order = 0;
        s.primary.resize(1);
        s.companion.resize(1);
    }
    write_coefficients_csv(ctx.path("coefficients.csv"), s);
    ordered_json j;
    j["order"] = s.order;
    j["overflowed"] = s.overflowed;
    if (s.order >= 8) {
        const RadiusEstimate re = radius_estimate(s, ctx.cfg.norm);
        j["radius"] = {{"above_cutoff", re.above_cutoff},
                       {"value", re.above_cutoff ? 0.0 : re.radius}};
    }
    write_json(ctx.path("series.json"), j);
    std::cout << "series: order " << s.order << " written to " << ctx.path("coefficients.csv")
              << "\n";
    return 0;
}

inline int cmd_march(const Context& ctx) {
    const BorelSolution sol = run_march(ctx);
    write_borel_solution_csv(ctx.path("borel_solution.csv"), sol);
    ordered_json j;
    j["nodes"] = sol.nodes();
    j["p_max"] = sol.grid.p_max;
    j["seed_order"] = sol.seed_order;
    j["residual_refinement"] = ctx.cfg.residual_refinement;
    if (ctx.cfg.residual_refinement >= 1) {
        const double res = residual_integral_eq(sol, ctx.cfg.residual_refinement);
        j["max_relative_residual"] = res;
        std::cout << "march: " << sol.nodes() << " nodes, residual " << res << "\n";
    } else {
        j["max_relative_residual"] = nullptr;
        std::cout << "march: " << sol.nodes() << " nodes (residual pass skipped)\n";
    }
    write_json(ctx.path("march.json"), j);
    return 0;
}

inline int cmd_reconstruct(const Context& ctx, bool compare_oracle) {
    const auto [n0, n1] = data_norms(ctx);
    const ConstantsBundle cb = lemma24_constants(ctx.cfg.params, ctx.cfg.norm, kernel_table());
    const GrowthEstimate ge = apriori_growth(ctx.cfg.problem, n0, n1, cb);
    const BorelSolution sol = run_march(ctx);

    TimeTrajectory traj;
    traj.problem = ctx.cfg.problem;
    traj.source = TrajectorySource::laplace;
    ordered_json cmp = ordered_json::array();
    double worst = 0.0;
    for (int i = 1; i <= ctx.cfg.time_samples; ++i) {
        const double t = ctx.cfg.time_t_end * i / ctx.cfg.time_samples;
        const FlowState st = laplace_eval(sol, t, ge.omega);
        traj.times.push_back(t);
        traj.primary.push_back(st.primary);
        traj.companion.push_back(st.companion);
        if (compare_oracle) {
            const long steps = std::max(1L, std::lround(t / ctx.cfg.time_dt));
            const double dt = t / static_cast<double>(steps);
            const TimeTrajectory rk =
                galerkin_rk4(ctx.cfg.problem, ctx.data.primary, ctx.data.companion,
                             ctx.data.forcing, ctx.cfg.params, t, dt,
                             static_cast<int>(std::max(1L, steps)));
            SpectralField dp = traj.primary.back(), dc = traj.companion.back();
            detail::axpy(dp, rk.primary.back(), cplx{-1.0, 0.0});
            detail::axpy(dc, rk.companion.back(), cplx{-1.0, 0.0});
            const double ref = std::max(field_norm(rk.primary.back(), rk.companion.back(), ctx.cfg.norm), 1e-300);
            const double dev = field_norm(dp, dc, ctx.cfg.norm) / ref;
            worst = std::max(worst, dev);
            cmp.push_back({{"t", t}, {"relative_deviation", dev}});
        }
    }
    write_trajectory_csv(ctx.path("trajectory.csv"), traj);
    ordered_json j;
    j["omega"] = ge.omega;
    j["samples"] = ctx.cfg.time_samples;
    j["t_end"] = ctx.cfg.time_t_end;
    if (compare_oracle) {
        j["oracle_comparison"] = cmp;
        j["max_relative_deviation"] = worst;
    }
    write_json(ctx.path("reconstruct.json"), j);
    std::cout << "reconstruct: " << ctx.cfg.time_samples << " times";
    if (compare_oracle) std::cout << ", max oracle deviation " << worst;
    std::cout << "\n";
    return 0;
}

inline int cmd_estimate(const Context& ctx) {
    const auto [n0, n1] = data_norms(ctx);
    const KernelTable& table = kernel_table();
    const ConstantsBundle cb = lemma24_constants(ctx.cfg.params, ctx.cfg.norm, table);
    const GrowthEstimate ge = apriori_growth(ctx.cfg.problem, n0, n1, cb);

    ordered_json j;
    j["constants"] = {{"c0", cb.c0}, {"c2", cb.c2}, {"c3", cb.c3}, {"c4", cb.c4},
                      {"m0", cb.m0}, {"m1", cb.m1}, {"m2", cb.m2}, {"m3", cb.m3},
                      {"sup_G", table.sup_G}, {"sup_G_over_z", table.sup_G_over_z}};
    j["data_norms"] = {{"initial_pair", n0}, {"first_coefficient_pair", n1}};
    j["growth"] = {{"omega", ge.omega},
                   {"l_ball", ge.l_ball},
                   {"condition_lhs_at_omega",
                    growth_condition_lhs(ctx.cfg.problem, n0, n1, cb, ge.omega)}};

    if (ctx.cfg.norm.kind == NormKind::gamma_beta && ctx.cfg.norm.beta > 0.0 &&
        ctx.cfg.norm.gamma > ctx.cfg.norm.dim) {
        const SeriesBoundConstants sb =
            series_bound_constants(ctx.cfg.problem, n0, n1, cb, ctx.cfg.params, ctx.cfg.norm);
        j["series_bounds"] = {{"a0", sb.a0},
                              {"d0", sb.d0},
                              {"radius_lower_bound", sb.radius_lower_bound},
                              {"zero_data", sb.zero_data}};
    }

    const double k1 = support_kmax(ctx.data);
    if (k1 > 0.0) {
        const std::vector<double> b{field_norm(ctx.data.forcing, ctx.cfg.norm)};
        const MajorantSequence ms = majorant_sequence(n0, b, k1, ctx.cfg.params,
                                                      ctx.cfg.majorant_order, cb.c0,
                                                      ctx.cfg.problem);
        j["majorant"] = {{"k1", k1},
                         {"radius_bound", ms.radius_bound},
                         {"order", ms.a_tilde.size() - 1},
                         {"overflowed", ms.overflowed}};
    }

    const BorelSolution sol = run_march(ctx);
    double p0 = ctx.cfg.estimate_p0 > 0.0 ? ctx.cfg.estimate_p0 : 0.5 * sol.grid.p_max;
    std::size_t p0_index = 0;
    if (ctx.cfg.estimate_p0 > 0.0) {
        bool found = false;
        for (std::size_t i = 0; i < sol.nodes(); ++i)
            if (std::abs(sol.grid.nodes[i] - p0) <= 1e-9 * std::max(1.0, p0)) {
                p0_index = i;
                found = true;
                break;
            }
        if (!found) throw config_error("estimate.p0 is not a grid node");
    } else {
        for (std::size_t i = 0; i < sol.nodes(); ++i)
            if (sol.grid.nodes[i] <= p0) p0_index = i;
    }
    const ImprovedEstimateReport rep =
        improved_existence_scan(sol, p0_index, ge.omega, cb, table, ctx.cfg.norm);
    j["improved"] = {{"p0", rep.p0},
                     {"omega0", rep.omega0},
                     {"b", rep.b},
                     {"epsilon1", rep.epsilon1},
                     {"B1", rep.b1},
                     {"B2_integral", rep.b2_integral},
                     {"B3", rep.b3},
                     {"B4", rep.b4},
                     {"omega_star", rep.omega_star},
                     {"omega_final", rep.omega_final},
                     {"existence_time", rep.existence_time},
                     {"tail_cutoff_p", rep.tail_cutoff_p},
                     {"apriori_omega", ge.omega},
                     {"improved_below_apriori", rep.omega_final <= ge.omega}};
    write_json(ctx.path("estimate.json"), j);
    std::cout << "estimate: omega " << ge.omega << ", improved " << rep.omega_final
              << ", existence time " << rep.existence_time << "\n";
    return 0;
}

struct Check {
    std::string name;
    double value;
    double tolerance;
    bool pass;
};

inline int cmd_verify(const Context& ctx) {
    std::vector<Check> checks;
    auto add = [&](const std::string& name, double value, double tol, bool pass) {
        checks.push_back({name, value, tol, pass});
    };
    const KernelTable& table = kernel_table();

    add("two_j1_over_z(0) == 1", std::abs(two_j1_over_z(0.0) - 1.0), 1e-15,
        std::abs(two_j1_over_z(0.0) - 1.0) <= 1e-15);
    {
        double sup = 0.0;
        for (double z = 0.0; z <= 100.0; z += 0.01) sup = std::max(sup, 0.5 * std::abs(two_j1_over_z(z)));
        add("sup |J1(z)/z| == 1/2", std::abs(sup - 0.5), 1e-10, std::abs(sup - 0.5) <= 1e-10);
    }
    for (double z : {0.5, 2.0, 10.0})
        add("G(z,z) == 0 at z=" + std::to_string(z), std::abs(kernel_g(z, z)), 1e-14,
            std::abs(kernel_g(z, z)) <= 1e-14);
    add("sup |G| in [0.55, 0.65]", table.sup_G, 0.0,
        table.sup_G >= 0.55 && table.sup_G <= 0.65);
    add("sup |G/z| finite positive", table.sup_G_over_z, 0.0,
        table.sup_G_over_z > 0.0 && std::isfinite(table.sup_G_over_z));
    add("M0 in [3.7, 3.8]", m0_constant(), 0.0, m0_constant() >= 3.7 && m0_constant() <= 3.8);

    {
        // kernel ODE residual on 50 deterministic pseudo-random triples
        std::mt19937_64 rng(20240811u);
        auto unif = [&](double lo, double hi) {
            return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
        };
        double worst = 0.0;
        for (int i = 0; i < 50; ++i) {
            const double p = unif(0.3, 5.0);
            const double pp = unif(0.01, 0.75) * p;
            const double ks = unif(0.05, 4.0);
            const double h = 1e-4 * std::max(1.0, p);
            const double hp = kernel_h(p + h, pp, ks), hm = kernel_h(p - h, pp, ks),
                         h0 = kernel_h(p, pp, ks);
            const double d1 = (hp - hm) / (2.0 * h);
            const double d2 = (hp - 2.0 * h0 + hm) / (h * h);
            const double res = p * d2 + 2.0 * d1 + ks * h0;
            worst = std::max(worst, std::abs(res) / std::max(std::abs(h0), ks));
        }
        add("kernel ODE residual (50 triples)", worst, 1e-5, worst <= 1e-5);
    }
    {
        // Laplace identity of the inhomogeneous Bessel factor
        double worst = 0.0;
        for (auto [ks, t] : {std::pair{1.0, 0.1}, std::pair{4.0, 0.05}}) {
            const double closed = (1.0 - std::exp(-ks * t)) / ks;
            const double P = 40.0 * t;
            const int nq = 200000;
            double acc = 0.0;
            for (int i = 0; i <= nq; ++i) {
                const double p = P * i / nq;
                const double f = two_j1_over_z(2.0 * std::sqrt(ks * p)) * std::exp(-p / t);
                acc += (i == 0 || i == nq) ? 0.5 * f : f;
            }
            acc *= P / nq;
            worst = std::max(worst, std::abs(acc - closed));
        }
        add("Bessel Laplace identity", worst, 1e-8, worst <= 1e-8);
    }
    {
        // norm properties on the config lattice: subalgebra, projection,
        // homogeneity; 100 deterministic trials each
        std::mt19937_64 rng(777u);
        auto unif = [&](double lo, double hi) {
            return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
        };
        const ModeLattice lat = ctx.cfg.lattice;
        const double c0 = c0_constant(ctx.cfg.norm);
        auto random_scalar = [&]() {
            SpectralField f(lat, FieldKind::scalar);
            for (std::size_t i = 0; i < lat.size(); ++i) {
                const std::size_t ni = lat.negated_index(i);
                if (ni < i) continue;
                const cplx v{unif(-1, 1), unif(-1, 1)};
                f.at(i, 0) = v;
                f.at(ni, 0) = std::conj(v);
                if (ni == i) f.at(i, 0) = cplx{v.real(), 0.0};
            }
            return f;
        };
        double worst_sub = 0.0, worst_proj = 0.0, worst_hom = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            SpectralField f = random_scalar(), g = random_scalar();
            const SpectralField fg = convolve(f, g);
            const double lhs = field_norm(fg, ctx.cfg.norm);
            const double rhs = c0 * field_norm(f, ctx.cfg.norm) * field_norm(g, ctx.cfg.norm);
            worst_sub = std::max(worst_sub, rhs > 0 ? lhs / rhs : 0.0);

            SpectralField v(lat, FieldKind::vector);
            for (std::size_t i = 0; i < lat.size(); ++i) {
                const std::size_t ni = lat.negated_index(i);
                if (ni < i) continue;
                for (int c = 0; c < lat.dim; ++c) {
                    const cplx val{unif(-1, 1), unif(-1, 1)};
                    v.at(i, c) = val;
                    v.at(ni, c) = std::conj(val);
                    if (ni == i) v.at(i, c) = cplx{val.real(), 0.0};
                }
            }
            SpectralField pv = v;
            project_divergence_free(pv);
            const double nv = field_norm(v, ctx.cfg.norm);
            const double npv = field_norm(pv, ctx.cfg.norm);
            worst_proj = std::max(worst_proj, nv > 0 ? npv / nv : 0.0);

            const double alpha = unif(0.1, 5.0);
            SpectralField af = f;
            af *= cplx{alpha, 0.0};
            const double lhs_h = field_norm(af, ctx.cfg.norm);
            const double rhs_h = alpha * field_norm(f, ctx.cfg.norm);
            if (rhs_h > 0)
                worst_hom = std::max(worst_hom, std::abs(lhs_h - rhs_h) / rhs_h);
        }
        add("subalgebra ||f*g|| <= C0 ||f|| ||g||", worst_sub, 1.0, worst_sub <= 1.0);
        add("projection bound", worst_proj, 1.0, worst_proj <= 1.0 + 1e-14);
        add("norm homogeneity", worst_hom, 1e-14, worst_hom <= 1e-14);
    }

    ordered_json j;
    bool all = true;
    ordered_json arr = ordered_json::array();
    for (const Check& c : checks) {
        arr.push_back({{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance},
                       {"pass", c.pass}});
        all = all && c.pass;
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << " (value " << c.value << ")\n";
    }
    j["checks"] = arr;
    j["all_pass"] = all;
    write_json(ctx.path("verify.json"), j);
    return all ? 0 : 3;
}

inline int cmd_oracle(const Context& ctx) {
    const long steps = std::max(1L, std::lround(ctx.cfg.time_t_end / ctx.cfg.time_dt));
    const int stride = static_cast<int>(std::max(1L, steps / 1000));
    const TimeTrajectory traj =
        galerkin_rk4(ctx.cfg.problem, ctx.data.primary, ctx.data.companion, ctx.data.forcing,
                     ctx.cfg.params, ctx.cfg.time_t_end, ctx.cfg.time_dt, stride);
    write_trajectory_csv(ctx.path("trajectory.csv"), traj);
    std::cout << "oracle: " << traj.times.size() << " samples written\n";
    return 0;
}

} // namespace cli_detail

/// CLI entry: borelflow {series|march|reconstruct|estimate|verify|oracle}
/// --config path [--order N] [--p-max X] [--compare-oracle] [--workers N] [--out DIR].
/// Exit codes: 0 success, 2 config error, 3 numerical failure, 4 validity
/// region violation.
inline int run_command(const std::vector<std::string>& args) {
    CLI::App app{"spectral Borel-plane solver for buoyant and magnetic flows"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    int order = -1, workers = 0;
    double pmax = 0.0;
    bool compare_oracle = false;

    const std::vector<std::string> names{"series", "march", "reconstruct", "estimate", "verify",
                                         "oracle"};
    for (const std::string& n : names) {
        CLI::App* sub = app.add_subcommand(n);
        sub->add_option("--config", config_path, "run configuration (json)")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--order", order, "series/seed order override");
        sub->add_option("--p-max", pmax, "grid extent override");
        sub->add_option("--workers", workers, "worker count (BOREL_FLOW_WORKERS overrides default)");
        if (n == "reconstruct")
            sub->add_flag("--compare-oracle", compare_oracle, "compare against the RK4 oracle");
    }

    std::vector<const char*> argv;
    argv.push_back("borelflow");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        cli_detail::Context ctx =
            cli_detail::make_context(config_path, out_dir, order, pmax, workers);
        if (app.got_subcommand("series")) return cli_detail::cmd_series(ctx);
        if (app.got_subcommand("march")) return cli_detail::cmd_march(ctx);
        if (app.got_subcommand("reconstruct")) return cli_detail::cmd_reconstruct(ctx, compare_oracle);
        if (app.got_subcommand("estimate")) return cli_detail::cmd_estimate(ctx);
        if (app.got_subcommand("verify")) return cli_detail::cmd_verify(ctx);
        if (app.got_subcommand("oracle")) return cli_detail::cmd_oracle(ctx);
        return 2;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const validity_error& e) {
        std::cerr << "validity error: " << e.what() << "\n";
        return 4;
    } catch (const numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace borelflow

#endif
