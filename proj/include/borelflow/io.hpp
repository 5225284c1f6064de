// SPDX-License-Identifier: Apache-2.0

#ifndef BORELFLOW_IO_HPP
#define BORELFLOW_IO_HPP

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "borelflow/estimates.hpp"
#include "borelflow/grid.hpp"
#include "borelflow/norms.hpp"
#include "borelflow/reconstruct.hpp"

namespace borelflow {

using ordered_json = nlohmann::ordered_json;

/// One prescribed lattice mode: integer index tuple plus complex amplitude
/// per component.
struct ModeEntry {
    IVec n{0, 0, 0};
    std::vector<cplx> amp;
};

struct RunConfig {
    Problem problem = Problem::boussinesq;
    PhysicalParams params;
    ModeLattice lattice;
    std::vector<ModeEntry> initial_primary;
    std::vector<ModeEntry> initial_companion;
    std::vector<ModeEntry> forcing_modes;
    NormParams norm;
    int series_order = 16;
    double grid_p_max = 10.0;
    int grid_n = 256;
    double grid_grading = 2.0;
    double march_tol = 1e-12;
    int march_seed_order = 16;
    int residual_refinement = 2;
    double time_t_end = 0.1;
    double time_dt = 1e-3;
    int time_samples = 5;
    double estimate_p0 = 0.0; // 0: default to half of p_max
    int majorant_order = 40;
    int workers = 0;

    BorelGrid make_grid() const { return build_grid(grid_p_max, grid_n, grid_grading); }
};

namespace io_detail {

inline double num_or(const nlohmann::json& j, const char* key, double fallback) {
    return j.contains(key) ? j.at(key).get<double>() : fallback;
}
inline int int_or(const nlohmann::json& j, const char* key, int fallback) {
    return j.contains(key) ? j.at(key).get<int>() : fallback;
}

inline cplx parse_cplx(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2)
        throw config_error("complex amplitudes must be [re, im] pairs");
    return cplx{j.at(0).get<double>(), j.at(1).get<double>()};
}

inline std::vector<ModeEntry> parse_modes(const nlohmann::json& arr, int dim, int comps,
                                          const char* what) {
    std::vector<ModeEntry> out;
    if (arr.is_null()) return out;
    if (!arr.is_array()) throw config_error(std::string(what) + ": expected an array of modes");
    for (const auto& e : arr) {
        ModeEntry me;
        const auto& n = e.at("n");
        if (!n.is_array() || static_cast<int>(n.size()) != dim)
            throw config_error(std::string(what) + ": mode index tuple must have dim entries");
        for (int a = 0; a < dim; ++a) me.n[a] = n.at(static_cast<std::size_t>(a)).get<int>();
        const auto& amp = e.at("amp");
        if (comps == 1) {
            me.amp.push_back(parse_cplx(amp));
        } else {
            if (!amp.is_array() || static_cast<int>(amp.size()) != comps)
                throw config_error(std::string(what) + ": vector amplitude needs one [re,im] per component");
            for (int c = 0; c < comps; ++c) me.amp.push_back(parse_cplx(amp.at(static_cast<std::size_t>(c))));
        }
        out.push_back(std::move(me));
    }
    return out;
}

} // namespace io_detail

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw config_error(std::string("config parse error: ") + e.what());
    }
    try {
        RunConfig cfg;
        const std::string pb = j.at("problem").get<std::string>();
        if (pb == "boussinesq") cfg.problem = Problem::boussinesq;
        else if (pb == "mhd") cfg.problem = Problem::mhd;
        else throw config_error("problem must be \"boussinesq\" or \"mhd\"");

        const auto& lat = j.at("lattice");
        const int dim = lat.at("dim").get<int>();
        cfg.lattice = ModeLattice(lat.at("base").get<double>(), lat.at("cutoff").get<int>(), dim);

        if (j.contains("params")) {
            const auto& p = j.at("params");
            cfg.params.nu = io_detail::num_or(p, "nu", 1.0);
            cfg.params.mu_thermal = io_detail::num_or(p, "mu_thermal", 1.0);
            cfg.params.buoyancy_a = io_detail::num_or(p, "buoyancy_a", 0.0);
            cfg.params.mu_mag = io_detail::num_or(p, "mu_mag", 1.0);
            cfg.params.sigma = io_detail::num_or(p, "sigma", 1.0);
            cfg.params.rho = io_detail::num_or(p, "rho", 1.0);
        }
        cfg.params.dim = dim;
        cfg.params.validate();

        const int comps_companion = cfg.problem == Problem::boussinesq ? 1 : dim;
        if (j.contains("initial")) {
            const auto& ini = j.at("initial");
            if (ini.contains("primary"))
                cfg.initial_primary = io_detail::parse_modes(ini.at("primary"), dim, dim, "initial.primary");
            if (ini.contains("companion"))
                cfg.initial_companion =
                    io_detail::parse_modes(ini.at("companion"), dim, comps_companion, "initial.companion");
        }
        if (j.contains("forcing"))
            cfg.forcing_modes = io_detail::parse_modes(j.at("forcing"), dim, dim, "forcing");

        if (j.contains("norm")) {
            const auto& n = j.at("norm");
            const std::string kind = n.at("kind").get<std::string>();
            if (kind == "gamma_beta") cfg.norm.kind = NormKind::gamma_beta;
            else if (kind == "l1_linf") cfg.norm.kind = NormKind::l1_linf;
            else throw config_error("norm.kind must be \"gamma_beta\" or \"l1_linf\"");
            cfg.norm.gamma = io_detail::num_or(n, "gamma", 3.0);
            cfg.norm.beta = io_detail::num_or(n, "beta", 0.0);
        }
        cfg.norm.dim = dim;
        cfg.norm.validate();

        if (j.contains("series")) cfg.series_order = io_detail::int_or(j.at("series"), "order", 16);
        if (j.contains("grid")) {
            const auto& g = j.at("grid");
            cfg.grid_p_max = io_detail::num_or(g, "p_max", 10.0);
            cfg.grid_n = io_detail::int_or(g, "n", 256);
            cfg.grid_grading = io_detail::num_or(g, "grading", 2.0);
        }
        if (j.contains("march")) {
            const auto& m = j.at("march");
            cfg.march_tol = io_detail::num_or(m, "tol", 1e-12);
            cfg.march_seed_order = io_detail::int_or(m, "seed_order", cfg.series_order);
            cfg.residual_refinement = io_detail::int_or(m, "residual_refinement", 2);
        }
        if (j.contains("time")) {
            const auto& t = j.at("time");
            cfg.time_t_end = io_detail::num_or(t, "t_end", 0.1);
            cfg.time_dt = io_detail::num_or(t, "dt", 1e-3);
            cfg.time_samples = io_detail::int_or(t, "samples", 5);
        }
        if (j.contains("estimate")) {
            cfg.estimate_p0 = io_detail::num_or(j.at("estimate"), "p0", 0.0);
            cfg.majorant_order = io_detail::int_or(j.at("estimate"), "majorant_order", 40);
        }
        cfg.workers = io_detail::int_or(j, "workers", 0);
        if (cfg.series_order < 1 || cfg.grid_n < 1)
            throw config_error("series.order and grid.n must be positive");
        return cfg;
    } catch (const config_error&) {
        throw;
    } catch (const std::exception& e) {
        throw config_error(std::string("config validation error: ") + e.what());
    }
}

/// Build a field from a mode list: amplitudes placed at their indices, the
/// conjugate mode synthesized when absent and cross-checked when present.
/// Vector amplitudes must be orthogonal to their wavevector.
inline SpectralField build_field(const ModeLattice& lat, FieldKind kind,
                                 const std::vector<ModeEntry>& modes, const char* what) {
    SpectralField f(lat, kind);
    std::vector<char> given(lat.size() * static_cast<std::size_t>(f.comps()), 0);
    for (const auto& me : modes) {
        if (!lat.contains(me.n))
            throw config_error(std::string(what) + ": mode index outside the lattice");
        const std::size_t idx = lat.index(me.n);
        if (kind == FieldKind::vector) {
            const KVec k = lat.wavevector(me.n);
            cplx dot{0, 0};
            double mag = 0.0, km = 0.0;
            for (int c = 0; c < f.comps(); ++c) {
                dot += k[c] * me.amp[static_cast<std::size_t>(c)];
                mag += std::norm(me.amp[static_cast<std::size_t>(c)]);
                km += k[c] * k[c];
            }
            if (std::abs(dot) > 1e-12 * std::sqrt(km * mag) && mag > 0.0)
                throw config_error(std::string(what) + ": vector mode is not orthogonal to its wavevector");
            if (km == 0.0 && mag > 0.0)
                throw config_error(std::string(what) + ": vector fields cannot carry a zero mode");
        }
        for (int c = 0; c < f.comps(); ++c) {
            const std::size_t slot = idx * static_cast<std::size_t>(f.comps()) + static_cast<std::size_t>(c);
            if (given[slot] && f.at(idx, c) != me.amp[static_cast<std::size_t>(c)])
                throw config_error(std::string(what) + ": mode listed twice with conflicting amplitudes");
            f.at(idx, c) = me.amp[static_cast<std::size_t>(c)];
            given[slot] = 1;
        }
    }
    // conjugate completion / consistency
    for (const auto& me : modes) {
        IVec neg = me.n;
        for (int a = 0; a < lat.dim; ++a) neg[a] = -neg[a];
        const std::size_t nid = lat.index(neg);
        for (int c = 0; c < f.comps(); ++c) {
            const std::size_t slot = nid * static_cast<std::size_t>(f.comps()) + static_cast<std::size_t>(c);
            const cplx want = std::conj(me.amp[static_cast<std::size_t>(c)]);
            if (given[slot]) {
                if (std::abs(f.at(nid, c) - want) > 1e-12 * std::max(1.0, std::abs(want)))
                    throw config_error(std::string(what) +
                                       ": mode pair violates conjugate symmetry");
            } else {
                f.at(nid, c) = want;
            }
        }
    }
    return f;
}

struct ProblemData {
    SpectralField primary;
    SpectralField companion;
    SpectralField forcing;
};

inline ProblemData build_problem_data(const RunConfig& cfg) {
    const FieldKind ck = cfg.problem == Problem::boussinesq ? FieldKind::scalar : FieldKind::vector;
    ProblemData d{build_field(cfg.lattice, FieldKind::vector, cfg.initial_primary, "initial.primary"),
                  build_field(cfg.lattice, ck, cfg.initial_companion, "initial.companion"),
                  build_field(cfg.lattice, FieldKind::vector, cfg.forcing_modes, "forcing")};
    return d;
}

namespace io_detail {

inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void field_row(std::ostream& os, const SpectralField& f, std::size_t mode) {
    for (int c = 0; c < f.comps(); ++c)
        os << ',' << fmt17(f.at(mode, c).real()) << ',' << fmt17(f.at(mode, c).imag());
}

inline void mode_cols(std::ostream& os, const ModeLattice& lat, std::size_t mode) {
    const IVec n = lat.multi(mode);
    for (int a = 0; a < lat.dim; ++a) os << ',' << n[a];
}

inline std::string field_header(const char* prefix, int comps) {
    std::string h;
    for (int c = 0; c < comps; ++c) {
        h += ',';
        h += prefix;
        h += std::to_string(c);
        h += "_re,";
        h += prefix;
        h += std::to_string(c);
        h += "_im";
    }
    return h;
}

} // namespace io_detail

/// coefficients.csv: one row per (order, mode).
inline void write_coefficients_csv(const std::string& path, const BorelTaylorSeries& s) {
    std::ofstream os(path);
    if (!os) throw config_error("cannot write " + path);
    const ModeLattice& lat = s.lattice;
    os << "l";
    for (int a = 0; a < lat.dim; ++a) os << ",n" << a;
    os << io_detail::field_header("pri", s.primary[0].comps())
       << io_detail::field_header("com", s.companion[0].comps()) << "\n";
    for (int l = 0; l <= s.order; ++l)
        for (std::size_t i = 0; i < lat.size(); ++i) {
            os << l;
            io_detail::mode_cols(os, lat, i);
            io_detail::field_row(os, s.primary[static_cast<std::size_t>(l)], i);
            io_detail::field_row(os, s.companion[static_cast<std::size_t>(l)], i);
            os << "\n";
        }
}

/// borel_solution.csv: one row per (node, mode).
inline void write_borel_solution_csv(const std::string& path, const BorelSolution& sol) {
    std::ofstream os(path);
    if (!os) throw config_error("cannot write " + path);
    const ModeLattice& lat = sol.lattice;
    os << "node,p";
    for (int a = 0; a < lat.dim; ++a) os << ",n" << a;
    os << io_detail::field_header("pri", sol.primary[0].comps())
       << io_detail::field_header("com", sol.companion[0].comps()) << "\n";
    for (std::size_t nd = 0; nd < sol.nodes(); ++nd)
        for (std::size_t i = 0; i < lat.size(); ++i) {
            os << nd << ',' << io_detail::fmt17(sol.grid.nodes[nd]);
            io_detail::mode_cols(os, lat, i);
            io_detail::field_row(os, sol.primary[nd], i);
            io_detail::field_row(os, sol.companion[nd], i);
            os << "\n";
        }
}

/// trajectory.csv: one row per (sample, mode).
inline void write_trajectory_csv(const std::string& path, const TimeTrajectory& traj) {
    std::ofstream os(path);
    if (!os) throw config_error("cannot write " + path);
    const ModeLattice& lat = traj.primary[0].lattice;
    os << "sample,t";
    for (int a = 0; a < lat.dim; ++a) os << ",n" << a;
    os << io_detail::field_header("pri", traj.primary[0].comps())
       << io_detail::field_header("com", traj.companion[0].comps()) << "\n";
    for (std::size_t s = 0; s < traj.times.size(); ++s)
        for (std::size_t i = 0; i < lat.size(); ++i) {
            os << s << ',' << io_detail::fmt17(traj.times[s]);
            io_detail::mode_cols(os, lat, i);
            io_detail::field_row(os, traj.primary[s], i);
            io_detail::field_row(os, traj.companion[s], i);
            os << "\n";
        }
}

/// Re-import of borel_solution.csv written by write_borel_solution_csv; the
/// config supplies lattice, problem data and grid shape.
inline BorelSolution read_borel_solution_csv(const std::string& path, const RunConfig& cfg) {
    std::ifstream is(path);
    if (!is) throw config_error("cannot read " + path);
    const ProblemData data = build_problem_data(cfg);
    BorelSolution sol;
    sol.problem = cfg.problem;
    sol.lattice = cfg.lattice;
    sol.params = cfg.params;
    sol.data0_primary = data.primary;
    sol.data0_companion = data.companion;
    sol.forcing = data.forcing;
    sol.seed_order = cfg.march_seed_order;
    sol.grid.grading = cfg.grid_grading;
    sol.grid.p_max = cfg.grid_p_max;

    const FieldKind ck = cfg.problem == Problem::boussinesq ? FieldKind::scalar : FieldKind::vector;
    const int pc = cfg.lattice.dim, cc = ck == FieldKind::scalar ? 1 : cfg.lattice.dim;
    std::string line;
    std::getline(is, line); // header
    std::size_t expect_node = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        auto next = [&]() -> std::string {
            if (!std::getline(ss, tok, ',')) throw config_error("malformed row in " + path);
            return tok;
        };
        const std::size_t node = std::stoul(next());
        const double p = std::stod(next());
        IVec n{0, 0, 0};
        for (int a = 0; a < cfg.lattice.dim; ++a) n[a] = std::stoi(next());
        if (node >= sol.primary.size()) {
            if (node != expect_node) throw config_error("non-contiguous node ids in " + path);
            sol.grid.nodes.push_back(p);
            sol.primary.emplace_back(cfg.lattice, FieldKind::vector);
            sol.companion.emplace_back(cfg.lattice, ck);
            ++expect_node;
        }
        const std::size_t idx = cfg.lattice.index(n);
        for (int c = 0; c < pc; ++c) {
            const double re = std::stod(next()), im = std::stod(next());
            sol.primary[node].at(idx, c) = cplx{re, im};
        }
        for (int c = 0; c < cc; ++c) {
            const double re = std::stod(next()), im = std::stod(next());
            sol.companion[node].at(idx, c) = cplx{re, im};
        }
    }
    if (sol.grid.nodes.empty()) throw config_error("no rows in " + path);
    return sol;
}

inline void write_json(const std::string& path, const ordered_json& j) {
    std::ofstream os(path);
    if (!os) throw config_error("cannot write " + path);
    os << j.dump(2) << "\n";
}

} // namespace borelflow

#endif
