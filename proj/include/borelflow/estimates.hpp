// SPDX-License-Identifier: Apache-2.0

#ifndef BORELFLOW_ESTIMATES_HPP
#define BORELFLOW_ESTIMATES_HPP

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <vector>

#include "borelflow/march.hpp"
#include "borelflow/norms.hpp"

namespace borelflow {

/// A-priori exponential growth rate and local-interval bound.
struct GrowthEstimate {
    double omega = 0.0;              // admissible growth rate, 1% margin applied
    double l_ball = 0.0;             // admissible interval length for the sup-norm ball
    ConstantsBundle constants;
    double a0 = 0.0, d0 = 0.0;       // series-bound constants when attached
    double radius_lower_bound = 0.0; // 1/(4 d0)
};

namespace detail {

/// Smallest w >= floor with f(w) < 1 for decreasing f, then 1% margin.
inline double bisect_decreasing(const std::function<double(double)>& f, double floor_value) {
    if (f(floor_value) < 1.0) return floor_value;
    double lo = floor_value, hi = std::max(1.0, 2.0 * floor_value);
    int guard = 0;
    while (f(hi) >= 1.0) {
        hi *= 2.0;
        if (++guard > 2000) throw numerical_error("apriori_growth: no admissible rate found");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) >= 1.0 ? lo : hi) = mid;
    }
    return hi * 1.01;
}

/// Largest L <= cap with f(L) < 1 for increasing f, then 1% margin.
inline double bisect_increasing(const std::function<double(double)>& f, double cap) {
    if (f(cap) < 1.0) return cap;
    double lo = 0.0, hi = cap;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 1.0 ? lo : hi) = mid;
    }
    return lo * 0.99;
}

} // namespace detail

/// Growth rate from the contraction conditions
///   boussinesq: 2 C2 sqrt(pi) w^{-1/2} { 2 w^{-1} n1 + n0 + (C3/(C2 sqrt(pi))) w^{-1/2} } < 1
///   mhd:        2 C4 sqrt(pi) w^{-1/2} { 2 w^{-1} n1 + n0 } < 1
/// and the local interval from the companion sup-norm conditions. n0 and n1
/// are the data norms ||(u0,theta0)||_N and ||(u1,theta1)||_N.
inline GrowthEstimate apriori_growth(Problem problem, double n0, double n1,
                                     const ConstantsBundle& cb) {
    constexpr double omega_floor = 1e-6;
    constexpr double l_cap = 1e6;
    const double sq = std::sqrt(std::numbers::pi);
    GrowthEstimate ge;
    ge.constants = cb;
    if (problem == Problem::boussinesq) {
        auto lhs_w = [&](double w) {
            return 2.0 * cb.c2 * sq / std::sqrt(w) * (2.0 * n1 / w + n0) + 2.0 * cb.c3 / w;
        };
        auto lhs_l = [&](double L) {
            return 2.0 * cb.c2 * std::sqrt(L) * (2.0 * L * n1 + n0) + 2.0 * cb.c3 * L;
        };
        ge.omega = detail::bisect_decreasing(lhs_w, omega_floor);
        ge.l_ball = detail::bisect_increasing(lhs_l, l_cap);
    } else {
        auto lhs_w = [&](double w) {
            return 2.0 * cb.c4 * sq / std::sqrt(w) * (2.0 * n1 / w + n0);
        };
        auto lhs_l = [&](double L) { return 2.0 * cb.c4 * std::sqrt(L) * (2.0 * L * n1 + n0); };
        ge.omega = detail::bisect_decreasing(lhs_w, omega_floor);
        ge.l_ball = detail::bisect_increasing(lhs_l, l_cap);
    }
    return ge;
}

/// Left side of the growth condition at a given rate (re-substitution check).
inline double growth_condition_lhs(Problem problem, double n0, double n1,
                                   const ConstantsBundle& cb, double w) {
    const double sq = std::sqrt(std::numbers::pi);
    if (problem == Problem::boussinesq)
        return 2.0 * cb.c2 * sq / std::sqrt(w) * (2.0 * n1 / w + n0) + 2.0 * cb.c3 / w;
    return 2.0 * cb.c4 * sq / std::sqrt(w) * (2.0 * n1 / w + n0);
}

struct SeriesBoundConstants {
    double a0 = 0.0;
    double d0 = 0.0;
    double radius_lower_bound = 0.0;
    bool zero_data = false; // A0 = 0 marker
};

/// Constants (A0, D0) of the coefficient bound
///   |(H^[l], S^[l])(k)| <= e^{-beta|k|} A0 D0^l (1+|k|)^{-gamma} Q_{2l}(beta|k|)/(2l+1)^2.
/// A0 D0 is pinned to the base-case product; D0 is the smallest value that
/// also satisfies the l = 2 constraint and the general induction inequality.
/// u0n and u1n are gamma-beta norms of the data pair and first-coefficient pair.
inline SeriesBoundConstants series_bound_constants(Problem problem, double u0n, double u1n,
                                                   const ConstantsBundle& cb,
                                                   const PhysicalParams& params,
                                                   const NormParams& np) {
    np.validate();
    if (np.kind != NormKind::gamma_beta || np.beta <= 0.0)
        throw std::invalid_argument("series_bound_constants: requires the (gamma,beta) norm with beta > 0");
    if (np.gamma <= np.dim)
        throw std::invalid_argument("series_bound_constants: requires gamma > dim");
    const double beta = np.beta, g = np.gamma;
    const int d = np.dim;
    const double c7 = d == 2 ? 18.0 : 2.0;
    const double pi = std::numbers::pi;
    const double betad = std::pow(beta, d);
    const double tg = std::pow(2.0, g);

    SeriesBoundConstants out;
    if (u1n == 0.0) {
        out.zero_data = true;
        out.a0 = 0.0;
        out.d0 = 1e-9;
        out.radius_lower_bound = 1.0 / (4.0 * out.d0);
        return out;
    }

    double product; // required A0 D0
    if (problem == Problem::boussinesq)
        product = 9.0 / (beta * beta) * u1n *
                  (cb.c0 * beta * u0n + cb.m1 + params.buoyancy_a * beta * beta);
    else
        product = 9.0 / (beta * beta) * u1n * cb.m2 * cb.m3 * (1.0 + cb.c0 * beta * u0n);

    auto ok = [&](double d0) {
        const double a0 = product / d0;
        double base2, induction;
        if (problem == Problem::boussinesq) {
            base2 = 6.0 * d0 * cb.m1 / (beta * beta) + d0 * params.buoyancy_a +
                    tg * 9.0 * c7 * pi * d0 / betad * u0n + cb.c0 * u1n * u1n / (a0 * beta);
            induction = 6.0 * d0 * cb.m1 / (beta * beta) + params.buoyancy_a * d0 / 2.0 +
                        tg * 9.0 * c7 * pi * d0 / betad * u0n +
                        tg * 9.0 * c7 * pi * d0 / (4.0 * betad) * u1n +
                        2.0 * tg * c7 * a0 / betad;
        } else {
            base2 = 6.0 * d0 * cb.m2 / (beta * beta) +
                    2.0 * tg * 9.0 * c7 * pi * cb.m3 * d0 / betad * u0n +
                    2.0 * cb.c0 * cb.m3 * u1n * u1n / (a0 * beta);
            induction = 6.0 * d0 * cb.m2 / (beta * beta) +
                        cb.m3 * (2.0 * tg * 9.0 * c7 * pi * d0 / betad * u0n +
                                 2.0 * tg * 9.0 * c7 * pi / (4.0 * betad) * u1n +
                                 4.0 * tg * c7 * a0 / betad);
        }
        return d0 * d0 >= base2 && d0 * d0 >= induction;
    };

    double hi = 1e-6;
    int guard = 0;
    while (!ok(hi)) {
        hi *= 2.0;
        if (++guard > 4000) throw numerical_error("series_bound_constants: no admissible D0");
    }
    double lo = hi / 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? hi : lo) = mid;
    }
    out.d0 = hi * (1.0 + 1e-9);
    out.a0 = product / out.d0;
    out.radius_lower_bound = 1.0 / (4.0 * out.d0);
    return out;
}

namespace detail {

/// (a)-restricted solution context: samples interpolated on [0, p0], zero
/// beyond, with the G^{(a)} right sides precomputed on a quadrature grid over
/// [0, 2 p0].
struct TruncatedTailContext {
    const BorelSolution* sol = nullptr;
    std::size_t p0_index = 0;
    double p0 = 0.0;
    BorelGrid quad;                 // nodes covering [0, 2 p0]
    std::vector<SpectralField> r1;  // right-side integrand of the primary line
    std::vector<SpectralField> r2;  // right-side integrand of the companion line
    SpectralField first1, first2;   // (u1, theta1) or (v1, B1) from the data
};

inline TruncatedTailContext make_tail_context(const BorelSolution& sol, std::size_t p0_index) {
    if (p0_index >= sol.nodes())
        throw std::invalid_argument("truncated_tail: p0 is not a grid node");
    TruncatedTailContext ctx;
    ctx.sol = &sol;
    ctx.p0_index = p0_index;
    ctx.p0 = sol.grid.nodes[p0_index];
    if (ctx.p0 <= 0.0) throw std::invalid_argument("truncated_tail: p0 must be positive");

    // quadrature nodes: solution nodes up to p0, then the same spacing
    // mirrored to reach 2 p0
    ctx.quad.p_max = 2.0 * ctx.p0;
    ctx.quad.grading = 1.0;
    for (std::size_t i = 0; i <= p0_index; ++i) ctx.quad.nodes.push_back(sol.grid.nodes[i]);
    for (std::size_t i = p0_index; i-- > 0;)
        ctx.quad.nodes.push_back(2.0 * ctx.p0 - sol.grid.nodes[i]);

    const ModeLattice& lat = sol.lattice;
    const std::size_t qn = ctx.quad.nodes.size();
    std::vector<SpectralField> ap(qn, SpectralField(lat, sol.primary[0].kind));
    std::vector<SpectralField> ac(qn, SpectralField(lat, sol.companion[0].kind));
    for (std::size_t i = 0; i < qn; ++i) {
        const double q = ctx.quad.nodes[i];
        if (q > ctx.p0 * (1.0 + 1e-14)) continue; // zero beyond p0
        const auto ic = interp_coeff(sol.grid.nodes, q);
        ap[i] = sol.primary[ic.i0];
        for (cplx& v : ap[i].amps) v *= ic.c0;
        if (ic.c1 != 0.0) axpy(ap[i], sol.primary[ic.i1], cplx{ic.c1, 0.0});
        ac[i] = sol.companion[ic.i0];
        for (cplx& v : ac[i].amps) v *= ic.c0;
        if (ic.c1 != 0.0) axpy(ac[i], sol.companion[ic.i1], cplx{ic.c1, 0.0});
    }

    {
        FlowState st(sol.problem, lat);
        st.primary = sol.data0_primary;
        st.companion = sol.data0_companion;
        auto fc = sol.problem == Problem::boussinesq
                      ? first_coeff_boussinesq(st, sol.forcing, sol.params)
                      : first_coeff_mhd(st, sol.forcing, sol.params);
        ctx.first1 = std::move(fc.first);
        ctx.first2 = std::move(fc.second);
    }
    ctx.r1.assign(qn, SpectralField(lat, sol.primary[0].kind));
    ctx.r2.assign(qn, SpectralField(lat, sol.companion[0].kind));
    auto pick_p = [&](std::size_t idx) -> const SpectralField& { return ap[idx]; };
    auto pick_c = [&](std::size_t idx) -> const SpectralField& { return ac[idx]; };
    for (std::size_t i = 0; i < qn; ++i) {
        SpectralField lc1(lat, sol.primary[0].kind), lc2(lat, sol.companion[0].kind);
        if (sol.problem == Problem::boussinesq) {
            march_detail::accumulate_lc(ctx.quad, i, nullptr, pick_p, pick_p, pick_c, lc1, lc2);
            march_detail::BoussinesqOps ops{sol.data0_primary, sol.data0_companion, sol.params, false};
            auto rr = ops.right_side(ap[i], ac[i], lc1, lc2);
            ctx.r1[i] = std::move(rr.first);
            ctx.r2[i] = std::move(rr.second);
        } else {
            march_detail::accumulate_lc(ctx.quad, i, nullptr, pick_p, pick_p, pick_c, lc1, lc2);
            SpectralField qq(lat, FieldKind::vector), qw(lat, FieldKind::vector);
            march_detail::accumulate_lc(ctx.quad, i, nullptr, pick_c, pick_c, pick_p, qq, qw);
            axpy(lc1, qq, cplx{-sol.params.lorentz(), 0.0});
            axpy(lc2, qw, cplx{-1.0, 0.0});
            march_detail::MhdOps ops{sol.data0_primary, sol.data0_companion, sol.params, false};
            auto rr = ops.right_side(ap[i], ac[i], lc1, lc2);
            ctx.r1[i] = std::move(rr.first);
            ctx.r2[i] = std::move(rr.second);
        }
    }
    return ctx;
}

/// (H,S)^(s)(p): inhomogeneous Bessel term plus the kernel quadrature of the
/// (a)-part right sides, cut at min(p, 2 p0).
inline std::pair<SpectralField, SpectralField> tail_eval(const TruncatedTailContext& ctx, double p) {
    const BorelSolution& sol = *ctx.sol;
    const ModeLattice& lat = sol.lattice;
    const std::size_t m = lat.size();
    const double diff_p = sol.params.nu;
    const double diff_c =
        sol.problem == Problem::boussinesq ? sol.params.mu_thermal : sol.params.eta_mag();
    const SpectralField& f1 = ctx.first1;
    const SpectralField& f2 = ctx.first2;
    SpectralField h(lat, f1.kind), s(lat, f2.kind);
    for (std::size_t i = 0; i < m; ++i) {
        const double ks = lat.ksq(i);
        const double w1 = two_j1_over_z(2.0 * std::sqrt(diff_p * ks * p));
        const double w2 = two_j1_over_z(2.0 * std::sqrt(diff_c * ks * p));
        for (int c = 0; c < f1.comps(); ++c) h.at(i, c) = w1 * f1.at(i, c);
        for (int c = 0; c < f2.comps(); ++c) s.at(i, c) = w2 * f2.at(i, c);
    }
    const double cut = std::min(p, 2.0 * ctx.p0);
    // trapezoid over quadrature nodes <= cut
    std::size_t last = 0;
    while (last + 1 < ctx.quad.nodes.size() && ctx.quad.nodes[last + 1] <= cut * (1.0 + 1e-14))
        ++last;
    const auto w = trapezoid_weights(ctx.quad.nodes, last);
    const UniqueKsq uq_p = unique_ksq(lat, diff_p);
    const UniqueKsq uq_c = unique_ksq(lat, diff_c);
    for (std::size_t j = 0; j <= last; ++j) {
        if (w[j] == 0.0) continue;
        const double q = ctx.quad.nodes[j];
        for (std::size_t uu = 0; uu < uq_p.values.size(); ++uu) {
            const double hk = kernel_h(p, q, uq_p.values[uu]);
            for (std::size_t i = 0; i < m; ++i) {
                if (uq_p.mode_to_value[i] != uu) continue;
                for (int c = 0; c < f1.comps(); ++c)
                    h.at(i, c) += w[j] * hk * ctx.r1[j].at(i, c);
            }
        }
        for (std::size_t uu = 0; uu < uq_c.values.size(); ++uu) {
            const double hk = kernel_h(p, q, uq_c.values[uu]);
            for (std::size_t i = 0; i < m; ++i) {
                if (uq_c.mode_to_value[i] != uu) continue;
                for (int c = 0; c < f2.comps(); ++c)
                    s.at(i, c) += w[j] * hk * ctx.r2[j].at(i, c);
            }
        }
    }
    return {std::move(h), std::move(s)};
}

} // namespace detail

/// Samples of (H,S)^(s) at the given evaluation points, built from the
/// solution restricted to [0, p0] (p0 must be the grid node at p0_index).
inline std::pair<std::vector<SpectralField>, std::vector<SpectralField>>
truncated_tail_functions(const BorelSolution& sol, std::size_t p0_index,
                         const std::vector<double>& eval_points) {
    const auto ctx = detail::make_tail_context(sol, p0_index);
    std::pair<std::vector<SpectralField>, std::vector<SpectralField>> out;
    out.first.reserve(eval_points.size());
    out.second.reserve(eval_points.size());
    for (double p : eval_points) {
        auto hs = detail::tail_eval(ctx, p);
        out.first.push_back(std::move(hs.first));
        out.second.push_back(std::move(hs.second));
    }
    return out;
}

/// Outcome of the finite-interval improvement.
struct ImprovedEstimateReport {
    double p0 = 0.0;
    double omega0 = 0.0;
    double b = 0.0;
    double epsilon1 = 0.0;
    double b1 = 0.0, b2_integral = 0.0, b3 = 0.0, b4 = 0.0;
    double omega_star = 0.0;   // epsilon1 + 2 sqrt(B3 b)
    double omega_final = 0.0;  // max(omega0, omega_star) with margin
    double existence_time = 0.0;
    double tail_cutoff_p = 0.0; // where the b-integrand fell below threshold
};

/// Improved growth estimate from knowledge of the solution on [0, p0]:
///   b  = omega0 int_{p0}^inf e^{-omega0 p} ||(H,S)^(s)(.,p)||_N dp
///   e1 = B1 + B4 + int_0^{p0} e^{-omega0 p} B2(p) dp
/// with B0 = C0 sup|G/z| (global supremum, conservative), B1, B2, B3, B4 the
/// lattice functionals. Any omega > e1 + 2 sqrt(B3 b), omega >= omega0 is
/// admissible; omega_final carries a 1% margin.
inline ImprovedEstimateReport improved_existence(const BorelSolution& sol, std::size_t p0_index,
                                                 double omega0, const ConstantsBundle& cb,
                                                 const KernelTable& table, const NormParams& np) {
    if (omega0 < 0.0) throw std::invalid_argument("improved_existence: omega0 must be >= 0");
    constexpr double omega_floor = 1e-6;
    ImprovedEstimateReport rep;
    rep.p0 = sol.grid.nodes[p0_index];
    rep.omega0 = omega0;

    const double kmax = sol.lattice.max_kmag();
    const double b0 = cb.c0 * table.sup_G_over_z;
    const double data_norm = field_norm(sol.data0_primary, sol.data0_companion, np);
    rep.b1 = 2.0 * kmax * b0 * data_norm;
    rep.b3 = kmax * b0;
    rep.b4 = sol.problem == Problem::boussinesq ? sol.params.buoyancy_a * b0 : 0.0;

    // int_0^{p0} e^{-omega0 p} B2(p) dp over the solution nodes
    double b2int = 0.0;
    for (std::size_t i = 0; i + 1 <= p0_index; ++i) {
        const double pa = sol.grid.nodes[i], pb = sol.grid.nodes[i + 1];
        const double fa = 2.0 * kmax * b0 * field_norm(sol.primary[i], sol.companion[i], np) *
                          std::exp(-omega0 * pa);
        const double fb = 2.0 * kmax * b0 * field_norm(sol.primary[i + 1], sol.companion[i + 1], np) *
                          std::exp(-omega0 * pb);
        b2int += 0.5 * (pb - pa) * (fa + fb);
    }
    rep.b2_integral = b2int;
    rep.epsilon1 = rep.b1 + rep.b4 + b2int;

    // b by extension sampling of (H,S)^(s) beyond p0
    if (omega0 > 0.0) {
        const auto ctx = detail::make_tail_context(sol, p0_index);
        double step = p0_index > 0
                          ? std::max(sol.grid.nodes[p0_index] - sol.grid.nodes[p0_index - 1],
                                     rep.p0 / 64.0)
                          : rep.p0 / 16.0;
        double p_prev = rep.p0;
        auto hs = detail::tail_eval(ctx, p_prev);
        double g_prev = std::exp(-omega0 * p_prev) * field_norm(hs.first, hs.second, np);
        double peak = g_prev, integral = 0.0;
        std::vector<std::pair<double, double>> trail; // (p, integrand)
        trail.emplace_back(p_prev, g_prev);
        const double p_cap = rep.p0 + 200.0 / omega0;
        while (true) {
            const double p_next = p_prev + step;
            auto hs2 = detail::tail_eval(ctx, p_next);
            const double g_next = std::exp(-omega0 * p_next) * field_norm(hs2.first, hs2.second, np);
            integral += 0.5 * step * (g_prev + g_next);
            peak = std::max(peak, g_next);
            trail.emplace_back(p_next, g_next);
            p_prev = p_next;
            g_prev = g_next;
            step *= 1.05;
            if (g_next < 1e-12 * peak || p_next > p_cap) break;
        }
        rep.tail_cutoff_p = p_prev;
        // geometric tail from the decay rate over the trailing samples
        if (g_prev > 0.0) {
            double p_ref = trail.front().first, g_ref = trail.front().second;
            for (const auto& [pp, gg] : trail)
                if (pp <= p_prev / 100.0 + rep.p0) { p_ref = pp; g_ref = gg; }
            double rate = omega0; // fallback: at worst the explicit damping
            if (g_ref > g_prev && p_prev > p_ref)
                rate = std::log(g_ref / g_prev) / (p_prev - p_ref);
            if (rate > 0.0) integral += g_prev / rate;
        }
        rep.b = omega0 * integral;
    }

    rep.omega_star = rep.epsilon1 + 2.0 * std::sqrt(std::max(0.0, rep.b3 * rep.b));
    rep.omega_final = std::max({omega0, rep.omega_star, omega_floor}) * 1.01;
    rep.existence_time = 1.0 / rep.omega_final;

    const double disc = (rep.epsilon1 - rep.omega_final) * (rep.epsilon1 - rep.omega_final);
    if (!(rep.omega_final > rep.epsilon1) || !(disc > 4.0 * rep.b3 * rep.b)) {
        std::ostringstream os;
        os << "improved_existence: discriminant condition unsatisfiable (epsilon1 = "
           << rep.epsilon1 << ", B3 b = " << rep.b3 * rep.b << ", omega = " << rep.omega_final
           << ")";
        throw numerical_error(os.str());
    }
    return rep;
}

/// omega0 scan over {omega/8, omega/4, omega/2}; returns the report with the
/// smallest omega_final.
inline ImprovedEstimateReport improved_existence_scan(const BorelSolution& sol,
                                                      std::size_t p0_index, double apriori_omega,
                                                      const ConstantsBundle& cb,
                                                      const KernelTable& table,
                                                      const NormParams& np) {
    std::optional<ImprovedEstimateReport> best;
    for (double div : {8.0, 4.0, 2.0}) {
        const ImprovedEstimateReport rep =
            improved_existence(sol, p0_index, apriori_omega / div, cb, table, np);
        if (!best || rep.omega_final < best->omega_final) best = rep;
    }
    return *best;
}

} // namespace borelflow

#endif
