// SPDX-License-Identifier: Apache-2.0

#ifndef BORELFLOW_MARCH_HPP
#define BORELFLOW_MARCH_HPP

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "borelflow/bessel.hpp"
#include "borelflow/grid.hpp"
#include "borelflow/taylor.hpp"

namespace borelflow {

namespace detail {

/// Unique diffusivity-scaled |k|^2 values over the lattice plus a per-mode
/// index; kernel evaluations are cached per unique value.
struct UniqueKsq {
    std::vector<double> values;
    std::vector<std::size_t> mode_to_value;
};

inline UniqueKsq unique_ksq(const ModeLattice& lat, double diffusivity) {
    UniqueKsq u;
    u.mode_to_value.resize(lat.size());
    for (std::size_t i = 0; i < lat.size(); ++i) {
        const double v = diffusivity * lat.ksq(i);
        std::size_t slot = u.values.size();
        for (std::size_t s = 0; s < u.values.size(); ++s)
            if (u.values[s] == v) { slot = s; break; }
        if (slot == u.values.size()) u.values.push_back(v);
        u.mode_to_value[i] = slot;
    }
    return u;
}

/// Product-integration coefficients for int_0^{p_n} H(p_n,p',ksq) R(p') dp'
/// with R piecewise linear over the nodes and the kernel sampled at 2-point
/// Gauss abscissae per panel: coef[uq][j] multiplies R at node j. The unknown
/// R(p_n) enters only through the last panel with O(dp^2) weight, which is
/// what makes the per-node fixed point contractive.
inline std::vector<std::vector<double>> outer_coeffs(const std::vector<double>& nodes,
                                                     std::size_t n,
                                                     const std::vector<double>& uksq) {
    static const double gx[2] = {-0.5773502691896257, 0.5773502691896257};
    const double pn = nodes[n];
    std::vector<std::vector<double>> coef(uksq.size(), std::vector<double>(n + 1, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
        const double a = nodes[j], b = nodes[j + 1];
        const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
        if (half <= 0.0) continue;
        for (int g = 0; g < 2; ++g) {
            const double tau = mid + half * gx[g];
            const double c1 = (tau - a) / (b - a);
            for (std::size_t q = 0; q < uksq.size(); ++q) {
                const double hk = kernel_h(pn, tau, uksq[q]);
                coef[q][j] += half * hk * (1.0 - c1);
                coef[q][j + 1] += half * hk * c1;
            }
        }
    }
    return coef;
}

inline bool field_is_zero(const SpectralField& f) { return f.max_abs() < 1e-300; }

/// Shear-pair structure: every field supported on one +-k pair (k=0 allowed
/// only for scalars) with vector amplitudes orthogonal to it. All advective
/// contractions of such fields vanish identically on the lattice, so the
/// march reduces to the inhomogeneous term plus the buoyancy coupling. This
/// is the regime of the closed-form oracles; detecting it keeps fine-grid
/// heat runs out of the O(N^2) convolution path.
struct ShearSpan {
    bool active = false;
    IVec kpos{0, 0, 0};
};

inline bool in_span(const SpectralField& f, const ShearSpan& sp) {
    if (!sp.active) return false;
    const ModeLattice& lat = f.lattice;
    const std::size_t ip = lat.index(sp.kpos);
    IVec neg = sp.kpos;
    for (int a = 0; a < lat.dim; ++a) neg[a] = -neg[a];
    const std::size_t in_ = lat.index(neg);
    const double scale = f.max_abs();
    const double tol = 1e-13 * scale;
    for (std::size_t i = 0; i < lat.size(); ++i) {
        if (i == ip || i == in_) continue;
        if (f.kind == FieldKind::scalar && lat.ksq(i) == 0.0) continue;
        if (f.mode_mag(i) > tol) return false;
    }
    if (f.kind == FieldKind::vector && scale > 0.0) {
        const KVec k = lat.wavevector(ip);
        const double km = lat.kmag(ip);
        cplx dot{0, 0}, dotn{0, 0};
        for (int c = 0; c < f.comps(); ++c) {
            dot += k[c] * f.at(ip, c);
            dotn -= k[c] * f.at(in_, c);
        }
        if (std::abs(dot) > 1e-12 * km * scale || std::abs(dotn) > 1e-12 * km * scale)
            return false;
    }
    return true;
}

inline ShearSpan detect_shear_span(const std::vector<const SpectralField*>& data) {
    ShearSpan sp;
    bool found = false;
    for (const SpectralField* f : data) {
        const ModeLattice& lat = f->lattice;
        const double tol = 1e-13 * f->max_abs();
        for (std::size_t i = 0; i < lat.size() && !found; ++i) {
            if (f->mode_mag(i) <= tol) continue;
            if (lat.ksq(i) == 0.0) continue;
            sp.kpos = lat.multi(i);
            found = true;
        }
        if (found) break;
    }
    if (!found) sp.kpos = IVec{1, 0, 0}; // all-zero data: trivially inert
    sp.active = true;
    for (const SpectralField* f : data)
        if (!in_span(*f, sp)) return ShearSpan{};
    return sp;
}

} // namespace detail

namespace march_detail {

using detail::field_is_zero;

/// Right-side assembly shared by the two systems. R fields are the
/// integrands multiplying the Green kernels.
struct BoussinesqOps {
    const SpectralField& u0;
    const SpectralField& theta0;
    const PhysicalParams& params;
    bool inert; // shear-span fast path: advective terms vanish identically

    std::pair<SpectralField, SpectralField> right_side(const SpectralField& h,
                                                       const SpectralField& s,
                                                       const SpectralField& lch,
                                                       const SpectralField& lcs) const {
        const ModeLattice& lat = u0.lattice;
        const cplx mi{0.0, -1.0};
        if (inert) {
            SpectralField rhv = detail::buoyancy_term(s, params.buoyancy_a);
            return {std::move(rhv), SpectralField(lat, FieldKind::scalar)};
        }
        SpectralField gh = advective_contraction(u0, h);
        gh += advective_contraction(h, u0);
        gh += lch;
        project_divergence_free(gh);
        SpectralField rhv(lat, FieldKind::vector);
        for (std::size_t i = 0; i < rhv.amps.size(); ++i) rhv.amps[i] = mi * gh.amps[i];
        rhv += detail::buoyancy_term(s, params.buoyancy_a);

        SpectralField gs = advective_contraction(u0, s);
        gs += advective_contraction(h, theta0);
        gs += lcs;
        SpectralField rsv(lat, FieldKind::scalar);
        for (std::size_t i = 0; i < rsv.amps.size(); ++i) rsv.amps[i] = mi * gs.amps[i];
        return {std::move(rhv), std::move(rsv)};
    }
};

struct MhdOps {
    const SpectralField& v0;
    const SpectralField& b0;
    const PhysicalParams& params;
    bool inert;

    std::pair<SpectralField, SpectralField> right_side(const SpectralField& w,
                                                       const SpectralField& q,
                                                       const SpectralField& lc_ww_qq,
                                                       const SpectralField& lc_wq_qw) const {
        const ModeLattice& lat = v0.lattice;
        if (inert)
            return {SpectralField(lat, FieldKind::vector), SpectralField(lat, FieldKind::vector)};
        const cplx mi{0.0, -1.0};
        const double lor = params.lorentz();
        // lc_ww_qq carries  (W**W) - lor (Q**Q); lc_wq_qw carries (W**Q) - (Q**W)
        SpectralField gw = advective_contraction(v0, w);
        gw += advective_contraction(w, v0);
        {
            SpectralField t = advective_contraction(b0, q);
            t += advective_contraction(q, b0);
            t *= cplx{-lor, 0.0};
            gw += t;
        }
        gw += lc_ww_qq;
        project_divergence_free(gw);
        SpectralField rw(lat, FieldKind::vector);
        for (std::size_t i = 0; i < rw.amps.size(); ++i) rw.amps[i] = mi * gw.amps[i];

        SpectralField gq = advective_contraction(v0, q);
        gq += advective_contraction(w, b0);
        {
            SpectralField t = advective_contraction(b0, w);
            t += advective_contraction(q, v0);
            t *= cplx{-1.0, 0.0};
            gq += t;
        }
        gq += lc_wq_qw;
        project_divergence_free(gq);
        SpectralField rq(lat, FieldKind::vector);
        for (std::size_t i = 0; i < rq.amps.size(); ++i) rq.amps[i] = mi * gq.amps[i];
        return {std::move(rw), std::move(rq)};
    }
};

/// Laplace-convolution accumulator at node j: for each retained s-node a adds
/// w_a adv(F(s_a), blend of targets at p_j - s_a) into the two sinks. The
/// candidate pair substitutes for node j.
template <typename PickF, typename PickG1, typename PickG2>
inline void accumulate_lc(const BorelGrid& grid, std::size_t j, const std::vector<char>* mask,
                          PickF&& pick_f, PickG1&& pick_g1, PickG2&& pick_g2,
                          SpectralField& sink1, SpectralField& sink2) {
    const auto w = detail::trapezoid_weights(grid.nodes, j);
    for (std::size_t a = 0; a <= j; ++a) {
        if (w[a] == 0.0) continue;
        if (mask && !(*mask)[a]) continue;
        const SpectralField& fa = pick_f(a);
        if (field_is_zero(fa)) continue;
        const auto ic = detail::interp_coeff(grid.nodes, grid.nodes[j] - grid.nodes[a]);
        SpectralField g1 = pick_g1(ic.i0);
        for (cplx& v : g1.amps) v *= ic.c0;
        if (ic.c1 != 0.0) detail::axpy(g1, pick_g1(ic.i1), cplx{ic.c1, 0.0});
        SpectralField g2 = pick_g2(ic.i0);
        for (cplx& v : g2.amps) v *= ic.c0;
        if (ic.c1 != 0.0) detail::axpy(g2, pick_g2(ic.i1), cplx{ic.c1, 0.0});
        detail::axpy(sink1, advective_contraction(fa, g1), cplx{w[a], 0.0});
        detail::axpy(sink2, advective_contraction(fa, g2), cplx{w[a], 0.0});
    }
}

} // namespace march_detail

namespace detail {

/// Generic Volterra march over the grid. Ops supplies the right side; the
/// diffusivities fix the two Green kernels and inhomogeneous Bessel factors.
template <typename Ops, typename LcEval>
inline BorelSolution run_march(const BorelTaylorSeries& series, const Ops& ops, LcEval&& lc_eval,
                               const SpectralField& data_primary, const SpectralField& data_companion,
                               const SpectralField& forcing, const PhysicalParams& params,
                               double diff_primary, double diff_companion, const BorelGrid& grid,
                               double tol, const char* who, bool inert) {
    const ModeLattice& lat = data_primary.lattice;
    const std::size_t m = lat.size();
    const int dp = series.primary[0].comps();
    const int dc = series.companion[0].comps();
    const std::size_t nn = grid.count();

    double p_switch = 8.0 * grid.nodes[1];
    if (series.order >= 8) {
        const NormParams np{NormKind::l1_linf, 3.0, 0.0, lat.dim};
        const RadiusEstimate re = radius_estimate(series, np);
        if (!re.above_cutoff) p_switch = std::min(p_switch, 0.25 * re.radius);
    }

    BorelSolution sol;
    sol.problem = series.problem;
    sol.lattice = lat;
    sol.grid = grid;
    sol.seed_order = series.order;
    sol.data0_primary = data_primary;
    sol.data0_companion = data_companion;
    sol.forcing = forcing;
    sol.params = params;
    sol.primary.reserve(nn);
    sol.companion.reserve(nn);

    const UniqueKsq uq_p = unique_ksq(lat, diff_primary);
    const UniqueKsq uq_c = unique_ksq(lat, diff_companion);
    const SpectralField& f1 = series.primary[0];
    const SpectralField& f2 = series.companion[0];

    auto inhomogeneous = [&](double p, SpectralField& a, SpectralField& b) {
        for (std::size_t i = 0; i < m; ++i) {
            const double ks = lat.ksq(i);
            const double w1 = two_j1_over_z(2.0 * std::sqrt(diff_primary * ks * p));
            const double w2 = two_j1_over_z(2.0 * std::sqrt(diff_companion * ks * p));
            for (int c = 0; c < dp; ++c) a.at(i, c) = w1 * f1.at(i, c);
            for (int c = 0; c < dc; ++c) b.at(i, c) = w2 * f2.at(i, c);
        }
    };

    std::vector<SpectralField> r1, r2;
    r1.reserve(nn);
    r2.reserve(nn);
    std::vector<char> r1_zero, r2_zero;
    std::size_t r1_nonzero = 0, r2_nonzero = 0;
    auto push_r = [&](std::pair<SpectralField, SpectralField>&& rr) {
        const bool z1 = field_is_zero(rr.first), z2 = field_is_zero(rr.second);
        r1_zero.push_back(z1 ? 1 : 0);
        r2_zero.push_back(z2 ? 1 : 0);
        if (!z1) ++r1_nonzero;
        if (!z2) ++r2_nonzero;
        r1.push_back(std::move(rr.first));
        r2.push_back(std::move(rr.second));
    };

    std::size_t node = 0;
    for (; node < nn && (node == 0 || grid.nodes[node] <= p_switch); ++node) {
        SeriesEval ev = eval_series(series, grid.nodes[node]);
        sol.primary.push_back(std::move(ev.primary));
        sol.companion.push_back(std::move(ev.companion));
        auto [lc1, lc2] = lc_eval(sol, node, sol.primary[node], sol.companion[node], nullptr);
        push_r(ops.right_side(sol.primary[node], sol.companion[node], lc1, lc2));
    }

    for (; node < nn; ++node) {
        const double pn = grid.nodes[node];
        std::vector<char> dep, indep;
        if (!inert) {
            dep.assign(node + 1, 0);
            indep.assign(node + 1, 0);
            for (std::size_t a = 0; a <= node; ++a) {
                const auto ic = detail::interp_coeff(grid.nodes, pn - grid.nodes[a]);
                const bool d = (a == node) || (ic.i0 == node && ic.c0 != 0.0) ||
                               (ic.i1 == node && ic.c1 != 0.0);
                dep[a] = d ? 1 : 0;
                indep[a] = d ? 0 : 1;
            }
        }

        SpectralField lc1_base(lat, sol.primary[0].kind), lc2_base(lat, sol.companion[0].kind);
        if (!inert) {
            auto base = lc_eval(sol, node, sol.primary[node - 1], sol.companion[node - 1], &indep);
            lc1_base = std::move(base.first);
            lc2_base = std::move(base.second);
        }

        const bool all_r1_zero = r1_nonzero == 0;
        const bool all_r2_zero = r2_nonzero == 0;

        std::vector<std::vector<double>> coef_p, coef_c;
        SpectralField inh1(lat, sol.primary[0].kind), inh2(lat, sol.companion[0].kind);
        inhomogeneous(pn, inh1, inh2);
        SpectralField stat1 = inh1, stat2 = inh2; // inhomogeneous + finalized-node quadrature
        bool stat_ready = false;

        SpectralField h = sol.primary[node - 1];
        SpectralField s = sol.companion[node - 1];
        SpectralField r1_n(lat, sol.primary[0].kind), r2_n(lat, sol.companion[0].kind);
        bool converged = false;
        double last_diff = 0.0;
        for (int it = 0; it < 50; ++it) {
            SpectralField lc1 = lc1_base, lc2 = lc2_base;
            if (!inert) {
                auto depterms = lc_eval(sol, node, h, s, &dep);
                lc1 += depterms.first;
                lc2 += depterms.second;
            }
            auto rr = ops.right_side(h, s, lc1, lc2);
            r1_n = std::move(rr.first);
            r2_n = std::move(rr.second);

            const bool need1 = !(all_r1_zero && field_is_zero(r1_n));
            const bool need2 = !(all_r2_zero && field_is_zero(r2_n));
            SpectralField hnew = inh1, snew = inh2;
            if (need1 || need2) {
                if (coef_p.empty()) {
                    coef_p = outer_coeffs(grid.nodes, node, uq_p.values);
                    coef_c = outer_coeffs(grid.nodes, node, uq_c.values);
                }
                if (!stat_ready) {
                    for (std::size_t i = 0; i < m; ++i) {
                        const auto& cp = coef_p[uq_p.mode_to_value[i]];
                        const auto& cc = coef_c[uq_c.mode_to_value[i]];
                        for (std::size_t j = 0; j < node; ++j) {
                            if (cp[j] != 0.0 && !r1_zero[j])
                                for (int c = 0; c < dp; ++c) stat1.at(i, c) += cp[j] * r1[j].at(i, c);
                            if (cc[j] != 0.0 && !r2_zero[j])
                                for (int c = 0; c < dc; ++c) stat2.at(i, c) += cc[j] * r2[j].at(i, c);
                        }
                    }
                    stat_ready = true;
                }
                hnew = stat1;
                snew = stat2;
                for (std::size_t i = 0; i < m; ++i) {
                    const double cp = coef_p[uq_p.mode_to_value[i]][node];
                    const double cc = coef_c[uq_c.mode_to_value[i]][node];
                    for (int c = 0; c < dp; ++c) hnew.at(i, c) += cp * r1_n.at(i, c);
                    for (int c = 0; c < dc; ++c) snew.at(i, c) += cc * r2_n.at(i, c);
                }
            }
            double diff = 0.0, scale = 0.0;
            bool finite = true;
            for (std::size_t i = 0; i < hnew.amps.size(); ++i) {
                const double d = std::abs(hnew.amps[i] - h.amps[i]);
                const double a = std::abs(hnew.amps[i]);
                if (!std::isfinite(d) || !std::isfinite(a)) finite = false;
                diff = std::max(diff, d);
                scale = std::max(scale, a);
            }
            for (std::size_t i = 0; i < snew.amps.size(); ++i) {
                const double d = std::abs(snew.amps[i] - s.amps[i]);
                const double a = std::abs(snew.amps[i]);
                if (!std::isfinite(d) || !std::isfinite(a)) finite = false;
                diff = std::max(diff, d);
                scale = std::max(scale, a);
            }
            h = std::move(hnew);
            s = std::move(snew);
            last_diff = finite ? diff : std::numeric_limits<double>::infinity();
            if (finite && diff <= tol * (1.0 + scale)) { converged = true; break; }
        }
        // the quadratic fixed-point system has a spurious large root; landing
        // there means the step is outside the contraction regime
        const double ball = 1.0 + std::max(inh1.max_abs(),
                                           std::max(sol.primary[node - 1].max_abs(),
                                                    sol.companion[node - 1].max_abs()));
        const double got = std::max(h.max_abs(), s.max_abs());
        if (!converged || !(got < 1e3 * ball)) {
            std::ostringstream os;
            os << who << ": fixed point "
               << (converged ? "left the contraction ball" : "did not converge") << " at node "
               << node << " (p = " << pn << "), last residual " << last_diff;
            throw numerical_error(os.str());
        }
        sol.primary.push_back(std::move(h));
        sol.companion.push_back(std::move(s));
        {
            SpectralField lc1 = lc1_base, lc2 = lc2_base;
            if (!inert) {
                auto depterms = lc_eval(sol, node, sol.primary[node], sol.companion[node], &dep);
                lc1 += depterms.first;
                lc2 += depterms.second;
            }
            push_r(ops.right_side(sol.primary[node], sol.companion[node], lc1, lc2));
        }
    }
    return sol;
}

} // namespace detail

inline BorelSolution march_boussinesq(const SpectralField& u0, const SpectralField& theta0,
                                      const SpectralField& forcing, const PhysicalParams& params,
                                      const BorelGrid& grid, int seed_order, double tol = 1e-12) {
    if (grid.count() < 2) throw std::invalid_argument("march_boussinesq: need at least two nodes");
    params.validate();
    BorelTaylorSeries series =
        series_boussinesq(u0, theta0, forcing, params, std::max(seed_order, 8));
    const detail::ShearSpan span =
        detail::detect_shear_span({&u0, &theta0, &forcing, &series.primary[0], &series.companion[0]});

    march_detail::BoussinesqOps ops{u0, theta0, params, span.active};
    auto lc_eval = [&](const BorelSolution& sol, std::size_t j, const SpectralField& hj,
                       const SpectralField& sj, const std::vector<char>* mask) {
        SpectralField lch(u0.lattice, FieldKind::vector), lcs(u0.lattice, FieldKind::scalar);
        if (!span.active) {
            auto pick_h = [&](std::size_t idx) -> const SpectralField& {
                return idx == j ? hj : sol.primary[idx];
            };
            auto pick_s = [&](std::size_t idx) -> const SpectralField& {
                return idx == j ? sj : sol.companion[idx];
            };
            march_detail::accumulate_lc(sol.grid, j, mask, pick_h, pick_h, pick_s, lch, lcs);
        }
        return std::make_pair(std::move(lch), std::move(lcs));
    };
    return detail::run_march(series, ops, lc_eval, u0, theta0, forcing, params, params.nu,
                             params.mu_thermal, grid, tol, "march_boussinesq", span.active);
}

inline BorelSolution march_mhd(const SpectralField& v0, const SpectralField& b0,
                               const SpectralField& forcing, const PhysicalParams& params,
                               const BorelGrid& grid, int seed_order, double tol = 1e-12) {
    if (grid.count() < 2) throw std::invalid_argument("march_mhd: need at least two nodes");
    params.validate();
    BorelTaylorSeries series = series_mhd(v0, b0, forcing, params, std::max(seed_order, 8));
    const detail::ShearSpan span =
        detail::detect_shear_span({&v0, &b0, &forcing, &series.primary[0], &series.companion[0]});

    march_detail::MhdOps ops{v0, b0, params, span.active};
    const double lor = params.lorentz();
    auto lc_eval = [&](const BorelSolution& sol, std::size_t j, const SpectralField& wj,
                       const SpectralField& qj, const std::vector<char>* mask) {
        SpectralField lc_w(v0.lattice, FieldKind::vector), lc_q(v0.lattice, FieldKind::vector);
        if (!span.active) {
            auto pick_w = [&](std::size_t idx) -> const SpectralField& {
                return idx == j ? wj : sol.primary[idx];
            };
            auto pick_q = [&](std::size_t idx) -> const SpectralField& {
                return idx == j ? qj : sol.companion[idx];
            };
            // (W ** W) - lor (Q ** Q) into lc_w; (W ** Q) - (Q ** W) into lc_q
            march_detail::accumulate_lc(sol.grid, j, mask, pick_w, pick_w, pick_q, lc_w, lc_q);
            SpectralField qq(v0.lattice, FieldKind::vector), qw(v0.lattice, FieldKind::vector);
            march_detail::accumulate_lc(sol.grid, j, mask, pick_q, pick_q, pick_w, qq, qw);
            detail::axpy(lc_w, qq, cplx{-lor, 0.0});
            detail::axpy(lc_q, qw, cplx{-1.0, 0.0});
        }
        return std::make_pair(std::move(lc_w), std::move(lc_q));
    };
    return detail::run_march(series, ops, lc_eval, v0, b0, forcing, params, params.nu,
                             params.eta_mag(), grid, tol, "march_mhd", span.active);
}

/// Defect of the discretized integral equation: the right side is re-evaluated
/// on a grid refined by the given factor with plain trapezoid quadrature
/// (independent of the march's product rule) and compared against the stored
/// samples. Returns max |lhs - rhs| / (1 + |lhs|) over nodes, modes, components.
inline double residual_integral_eq(const BorelSolution& sol, int refinement) {
    if (refinement < 1) throw std::invalid_argument("residual_integral_eq: refinement must be >= 1");
    const ModeLattice& lat = sol.lattice;
    const std::size_t m = lat.size();
    const std::size_t nn = sol.nodes();
    const PhysicalParams& params = sol.params;
    const double diff_p = params.nu;
    const double diff_c = sol.problem == Problem::boussinesq ? params.mu_thermal : params.eta_mag();

    // refined node set
    BorelGrid fine;
    fine.grading = sol.grid.grading;
    fine.p_max = sol.grid.p_max;
    fine.nodes.push_back(0.0);
    std::vector<std::size_t> orig_at; // index of original node within fine nodes
    orig_at.push_back(0);
    for (std::size_t j = 0; j + 1 < nn; ++j) {
        const double a = sol.grid.nodes[j], b = sol.grid.nodes[j + 1];
        for (int r = 1; r <= refinement; ++r)
            fine.nodes.push_back(a + (b - a) * r / refinement);
        orig_at.push_back(fine.nodes.size() - 1);
    }
    const std::size_t fn = fine.nodes.size();

    // linear interpolation of the solution onto the fine nodes
    std::vector<SpectralField> xp(fn, SpectralField(lat, sol.primary[0].kind));
    std::vector<SpectralField> xc(fn, SpectralField(lat, sol.companion[0].kind));
    for (std::size_t i = 0; i < fn; ++i) {
        const auto ic = detail::interp_coeff(sol.grid.nodes, fine.nodes[i]);
        xp[i] = sol.primary[ic.i0];
        for (cplx& v : xp[i].amps) v *= ic.c0;
        if (ic.c1 != 0.0) detail::axpy(xp[i], sol.primary[ic.i1], cplx{ic.c1, 0.0});
        xc[i] = sol.companion[ic.i0];
        for (cplx& v : xc[i].amps) v *= ic.c0;
        if (ic.c1 != 0.0) detail::axpy(xc[i], sol.companion[ic.i1], cplx{ic.c1, 0.0});
    }

    // right sides on the fine grid
    std::vector<SpectralField> r1(fn, SpectralField(lat, sol.primary[0].kind));
    std::vector<SpectralField> r2(fn, SpectralField(lat, sol.companion[0].kind));
    const cplx mi{0.0, -1.0};
    for (std::size_t i = 0; i < fn; ++i) {
        SpectralField lc1(lat, sol.primary[0].kind), lc2(lat, sol.companion[0].kind);
        auto pick_p = [&](std::size_t idx) -> const SpectralField& { return xp[idx]; };
        auto pick_c = [&](std::size_t idx) -> const SpectralField& { return xc[idx]; };
        if (sol.problem == Problem::boussinesq) {
            march_detail::accumulate_lc(fine, i, nullptr, pick_p, pick_p, pick_c, lc1, lc2);
            march_detail::BoussinesqOps ops{sol.data0_primary, sol.data0_companion, params, false};
            auto rr = ops.right_side(xp[i], xc[i], lc1, lc2);
            r1[i] = std::move(rr.first);
            r2[i] = std::move(rr.second);
        } else {
            march_detail::accumulate_lc(fine, i, nullptr, pick_p, pick_p, pick_c, lc1, lc2);
            SpectralField qq(lat, FieldKind::vector), qw(lat, FieldKind::vector);
            march_detail::accumulate_lc(fine, i, nullptr, pick_c, pick_c, pick_p, qq, qw);
            detail::axpy(lc1, qq, cplx{-params.lorentz(), 0.0});
            detail::axpy(lc2, qw, cplx{-1.0, 0.0});
            march_detail::MhdOps ops{sol.data0_primary, sol.data0_companion, params, false};
            auto rr = ops.right_side(xp[i], xc[i], lc1, lc2);
            r1[i] = std::move(rr.first);
            r2[i] = std::move(rr.second);
        }
    }

    const detail::UniqueKsq uq_p = detail::unique_ksq(lat, diff_p);
    const detail::UniqueKsq uq_c = detail::unique_ksq(lat, diff_c);
    const SpectralField& f1 = sol.primary[0];
    const SpectralField& f2 = sol.companion[0];
    const int dp = f1.comps(), dc = f2.comps();
    bool any_r1 = false, any_r2 = false;
    for (std::size_t j = 0; j < fn; ++j) {
        any_r1 = any_r1 || !detail::field_is_zero(r1[j]);
        any_r2 = any_r2 || !detail::field_is_zero(r2[j]);
    }

    double worst = 0.0;
    for (std::size_t on = 1; on < nn; ++on) {
        const std::size_t n = orig_at[on];
        const double pn = fine.nodes[n];
        const auto w = detail::trapezoid_weights(fine.nodes, n);
        // kernel-weighted trapezoid per unique ksq
        std::vector<std::vector<double>> kw_p, kw_c;
        if (any_r1) {
            kw_p.assign(uq_p.values.size(), std::vector<double>(n + 1));
            for (std::size_t q = 0; q < uq_p.values.size(); ++q)
                for (std::size_t j = 0; j <= n; ++j)
                    kw_p[q][j] = w[j] * kernel_h(pn, fine.nodes[j], uq_p.values[q]);
        }
        if (any_r2) {
            kw_c.assign(uq_c.values.size(), std::vector<double>(n + 1));
            for (std::size_t q = 0; q < uq_c.values.size(); ++q)
                for (std::size_t j = 0; j <= n; ++j)
                    kw_c[q][j] = w[j] * kernel_h(pn, fine.nodes[j], uq_c.values[q]);
        }
        for (std::size_t i = 0; i < m; ++i) {
            const double ks = lat.ksq(i);
            const double w1 = two_j1_over_z(2.0 * std::sqrt(diff_p * ks * pn));
            const double w2 = two_j1_over_z(2.0 * std::sqrt(diff_c * ks * pn));
            for (int c = 0; c < dp; ++c) {
                cplx rhs = w1 * f1.at(i, c);
                if (any_r1) {
                    const auto& kw = kw_p[uq_p.mode_to_value[i]];
                    for (std::size_t j = 0; j <= n; ++j) rhs += kw[j] * r1[j].at(i, c);
                }
                const cplx lhs = sol.primary[on].at(i, c);
                worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(lhs)));
            }
            for (int c = 0; c < dc; ++c) {
                cplx rhs = w2 * f2.at(i, c);
                if (any_r2) {
                    const auto& kw = kw_c[uq_c.mode_to_value[i]];
                    for (std::size_t j = 0; j <= n; ++j) rhs += kw[j] * r2[j].at(i, c);
                }
                const cplx lhs = sol.companion[on].at(i, c);
                worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(lhs)));
            }
        }
    }
    return worst;
}

} // namespace borelflow

#endif
