// SPDX-License-Identifier: Apache-2.0

#ifndef BORELFLOW_RECONSTRUCT_HPP
#define BORELFLOW_RECONSTRUCT_HPP

#include <cmath>
#include <sstream>
#include <vector>

#include "borelflow/grid.hpp"
#include "borelflow/norms.hpp"

namespace borelflow {

enum class TrajectorySource { laplace, rk4 };

struct TimeTrajectory {
    Problem problem = Problem::boussinesq;
    TrajectorySource source = TrajectorySource::rk4;
    std::vector<double> times;
    std::vector<SpectralField> primary;
    std::vector<SpectralField> companion;
};

/// Laplace reconstruction (u,theta)(k,t) = (u0,theta0)(k) + int_0^inf
/// (H,S)(k,p) e^{-p/t} dp, proven for 1/t > omega (hard gate). The grid
/// integral treats the samples as piecewise linear and integrates each
/// segment against e^{-p/t} in closed form (plain trapezoid of the damped
/// samples loses ~|X|/t^2 h^2 at small t, which no affordable grid absorbs);
/// beyond the grid a single exponential c e^{lam p} fitted per mode over the
/// last decade of nodes (lam clamped to omega) is integrated analytically.
inline FlowState laplace_eval(const BorelSolution& sol, double t, double omega) {
    if (t <= 0.0) throw std::invalid_argument("laplace_eval: t must be positive");
    if (1.0 / t <= omega) {
        std::ostringstream os;
        os << "laplace_eval: 1/t = " << 1.0 / t << " is not above the proven growth rate omega = "
           << omega << "; the representation is established for 1/t > omega only";
        throw validity_error(os.str());
    }
    const ModeLattice& lat = sol.lattice;
    const std::size_t m = lat.size();
    const std::size_t nn = sol.nodes();
    const double inv_t = 1.0 / t;

    FlowState out(sol.problem, lat);
    out.primary = sol.data0_primary;
    out.companion = sol.data0_companion;

    // per-node weights of the exact linear-segment x exponential integrals:
    // int_a^b e^{-rp} [(b-p) X_a + (p-a) X_b]/(b-a) dp summed over segments
    std::vector<double> w(nn, 0.0);
    const double r = inv_t;
    for (std::size_t j = 0; j + 1 < nn; ++j) {
        const double a = sol.grid.nodes[j], b = sol.grid.nodes[j + 1];
        const double h = b - a;
        if (h <= 0.0) continue;
        const double u = r * h;
        const double ea = std::exp(-r * a);
        const double f0 = -std::expm1(-u); // 1 - e^{-u}
        double f1;                         // 1 - (1+u) e^{-u}
        if (u < 1e-4) {
            f1 = u * u * (0.5 - u / 3.0 + u * u / 8.0);
        } else {
            f1 = f0 - u * std::exp(-u);
        }
        w[j] += ea * (f0 / r - f1 / (r * u));
        w[j + 1] += ea * f1 / (r * r * h);
    }

    // tail fit window: last decade of the grid
    const double p_lo = sol.grid.p_max / 10.0;
    std::vector<std::size_t> window;
    for (std::size_t j = 0; j < nn; ++j)
        if (sol.grid.nodes[j] >= p_lo) window.push_back(j);

    auto integrate_component = [&](auto&& sample) -> cplx {
        cplx acc{0.0, 0.0};
        for (std::size_t j = 0; j < nn; ++j) acc += w[j] * sample(j);
        // exponential tail correction
        const cplx xend = sample(nn - 1);
        if (window.size() >= 3 && std::abs(xend) > 1e-250) {
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            std::size_t cnt = 0;
            for (std::size_t j : window) {
                const double a = std::abs(sample(j));
                if (a <= 0.0) continue;
                const double x = sol.grid.nodes[j], y = std::log(a);
                sx += x; sy += y; sxx += x * x; sxy += x * y;
                ++cnt;
            }
            if (cnt >= 3) {
                double lam = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
                lam = std::min(lam, omega);
                const double pend = sol.grid.nodes[nn - 1];
                // int_pend^inf xend e^{lam (p - pend)} e^{-p/t} dp
                acc += xend * std::exp(-pend * inv_t) / (inv_t - lam);
            }
        }
        return acc;
    };

    for (std::size_t i = 0; i < m; ++i) {
        for (int c = 0; c < out.primary.comps(); ++c)
            out.primary.at(i, c) += integrate_component([&](std::size_t j) { return sol.primary[j].at(i, c); });
        for (int c = 0; c < out.companion.comps(); ++c)
            out.companion.at(i, c) += integrate_component([&](std::size_t j) { return sol.companion[j].at(i, c); });
    }
    return out;
}

namespace detail {

/// Truncated spectral right side of the evolution system.
inline void evolution_rhs(Problem problem, const SpectralField& p, const SpectralField& c,
                          const SpectralField& forcing, const PhysicalParams& params,
                          SpectralField& dp_out, SpectralField& dc_out) {
    const ModeLattice& lat = p.lattice;
    const std::size_t m = lat.size();
    const cplx mi{0.0, -1.0};
    if (problem == Problem::boussinesq) {
        SpectralField nl = advective_contraction(p, p);
        project_divergence_free(nl);
        SpectralField nlc = advective_contraction(p, c);
        for (std::size_t i = 0; i < m; ++i) {
            for (int cc = 0; cc < lat.dim; ++cc)
                dp_out.at(i, cc) = forcing.at(i, cc) - params.nu * lat.ksq(i) * p.at(i, cc) +
                                   mi * nl.at(i, cc);
            dc_out.at(i, 0) = -params.mu_thermal * lat.ksq(i) * c.at(i, 0) + mi * nlc.at(i, 0);
        }
        dp_out += buoyancy_term(c, params.buoyancy_a);
        project_divergence_free(dp_out);
        return;
    }
    const double lor = params.lorentz();
    const double eta = params.eta_mag();
    SpectralField nl_v = advective_contraction(p, p);
    {
        SpectralField t = advective_contraction(c, c);
        t *= cplx{-lor, 0.0};
        nl_v += t;
    }
    project_divergence_free(nl_v);
    SpectralField nl_b = advective_contraction(p, c);
    {
        SpectralField t = advective_contraction(c, p);
        t *= cplx{-1.0, 0.0};
        nl_b += t;
    }
    project_divergence_free(nl_b);
    for (std::size_t i = 0; i < m; ++i)
        for (int cc = 0; cc < lat.dim; ++cc) {
            dp_out.at(i, cc) =
                forcing.at(i, cc) - params.nu * lat.ksq(i) * p.at(i, cc) + mi * nl_v.at(i, cc);
            dc_out.at(i, cc) = -eta * lat.ksq(i) * c.at(i, cc) + mi * nl_b.at(i, cc);
        }
    project_divergence_free(dp_out);
    project_divergence_free(dc_out);
}

} // namespace detail

/// Classical fixed-step RK4 on the truncated mode system (identical
/// truncation to the Borel engines). Aborts on norm blow-up past 1e12.
/// record_stride subsamples the stored trajectory.
inline TimeTrajectory galerkin_rk4(Problem problem, const SpectralField& d0p,
                                   const SpectralField& d0c, const SpectralField& forcing,
                                   const PhysicalParams& params, double t_end, double dt,
                                   int record_stride = 1) {
    if (t_end <= 0.0 || dt <= 0.0) throw std::invalid_argument("galerkin_rk4: t_end and dt must be positive");
    if (record_stride < 1) record_stride = 1;
    const ModeLattice& lat = d0p.lattice;
    const long steps = std::lround(t_end / dt);
    if (steps < 1) throw std::invalid_argument("galerkin_rk4: dt exceeds t_end");

    TimeTrajectory traj;
    traj.problem = problem;
    traj.source = TrajectorySource::rk4;
    SpectralField p = d0p, c = d0c;
    traj.times.push_back(0.0);
    traj.primary.push_back(p);
    traj.companion.push_back(c);

    SpectralField k1p(lat, p.kind), k1c(lat, c.kind), k2p(lat, p.kind), k2c(lat, c.kind);
    SpectralField k3p(lat, p.kind), k3c(lat, c.kind), k4p(lat, p.kind), k4c(lat, c.kind);
    SpectralField tp(lat, p.kind), tc(lat, c.kind);

    for (long s = 0; s < steps; ++s) {
        detail::evolution_rhs(problem, p, c, forcing, params, k1p, k1c);
        tp = p; detail::axpy(tp, k1p, cplx{0.5 * dt, 0.0});
        tc = c; detail::axpy(tc, k1c, cplx{0.5 * dt, 0.0});
        detail::evolution_rhs(problem, tp, tc, forcing, params, k2p, k2c);
        tp = p; detail::axpy(tp, k2p, cplx{0.5 * dt, 0.0});
        tc = c; detail::axpy(tc, k2c, cplx{0.5 * dt, 0.0});
        detail::evolution_rhs(problem, tp, tc, forcing, params, k3p, k3c);
        tp = p; detail::axpy(tp, k3p, cplx{dt, 0.0});
        tc = c; detail::axpy(tc, k3c, cplx{dt, 0.0});
        detail::evolution_rhs(problem, tp, tc, forcing, params, k4p, k4c);
        for (std::size_t i = 0; i < p.amps.size(); ++i)
            p.amps[i] += dt / 6.0 * (k1p.amps[i] + 2.0 * k2p.amps[i] + 2.0 * k3p.amps[i] + k4p.amps[i]);
        for (std::size_t i = 0; i < c.amps.size(); ++i)
            c.amps[i] += dt / 6.0 * (k1c.amps[i] + 2.0 * k2c.amps[i] + 2.0 * k3c.amps[i] + k4c.amps[i]);
        const double t_now = dt * static_cast<double>(s + 1);
        if (std::max(p.max_abs(), c.max_abs()) > 1e12) {
            std::ostringstream os;
            os << "galerkin_rk4: blow-up detected at t = " << t_now;
            throw numerical_error(os.str());
        }
        if ((s + 1) % record_stride == 0 || s + 1 == steps) {
            traj.times.push_back(t_now);
            traj.primary.push_back(p);
            traj.companion.push_back(c);
        }
    }
    return traj;
}

/// Direct inverse-Fourier sum u(x) = sum_k amp(k) e^{i k.x}. The imaginary
/// residue must stay below 1e-12 of the magnitude (conjugate symmetry) and is
/// discarded after the check.
inline std::vector<std::vector<double>> physical_eval(const SpectralField& f,
                                                      const std::vector<KVec>& points) {
    const double defect = f.conj_symmetry_defect();
    const double scale = f.max_abs();
    if (defect > 1e-12 * std::max(scale, 1e-30))
        throw std::invalid_argument("physical_eval: field is not conjugate-symmetric");
    const ModeLattice& lat = f.lattice;
    std::vector<std::vector<double>> out(points.size(), std::vector<double>(f.comps(), 0.0));
    for (std::size_t pi = 0; pi < points.size(); ++pi) {
        for (int c = 0; c < f.comps(); ++c) {
            cplx acc{0.0, 0.0};
            for (std::size_t i = 0; i < lat.size(); ++i) {
                const KVec k = lat.wavevector(i);
                double phase = 0.0;
                for (int a = 0; a < lat.dim; ++a) phase += k[a] * points[pi][a];
                acc += f.at(i, c) * std::polar(1.0, phase);
            }
            if (std::abs(acc.imag()) > 1e-12 * std::max(1e-30, std::abs(acc)))
                throw numerical_error("physical_eval: imaginary residue above tolerance");
            out[pi][static_cast<std::size_t>(c)] = acc.real();
        }
    }
    return out;
}

/// Central-difference defect of the trajectory against the truncated spectral
/// system; max over interior samples, modes, components of
/// |d/dt - rhs| / (1 + |rhs|).
inline double pde_residual(const TimeTrajectory& traj, const SpectralField& forcing,
                           const PhysicalParams& params) {
    if (traj.times.size() < 3) throw std::invalid_argument("pde_residual: need at least 3 samples");
    const ModeLattice& lat = traj.primary[0].lattice;
    double worst = 0.0;
    SpectralField rp(lat, traj.primary[0].kind), rc(lat, traj.companion[0].kind);
    for (std::size_t i = 1; i + 1 < traj.times.size(); ++i) {
        const double h2 = traj.times[i + 1] - traj.times[i - 1];
        detail::evolution_rhs(traj.problem, traj.primary[i], traj.companion[i], forcing, params,
                              rp, rc);
        for (std::size_t a = 0; a < rp.amps.size(); ++a) {
            const cplx dd = (traj.primary[i + 1].amps[a] - traj.primary[i - 1].amps[a]) / h2;
            worst = std::max(worst, std::abs(dd - rp.amps[a]) / (1.0 + std::abs(rp.amps[a])));
        }
        for (std::size_t a = 0; a < rc.amps.size(); ++a) {
            const cplx dd = (traj.companion[i + 1].amps[a] - traj.companion[i - 1].amps[a]) / h2;
            worst = std::max(worst, std::abs(dd - rc.amps[a]) / (1.0 + std::abs(rc.amps[a])));
        }
    }
    return worst;
}

} // namespace borelflow

#endif
