// SPDX-License-Identifier: Apache-2.0

#ifndef BORELFLOW_TAYLOR_HPP
#define BORELFLOW_TAYLOR_HPP

#include <cmath>
#include <utility>
#include <vector>

#include "borelflow/field.hpp"
#include "borelflow/norms.hpp"

namespace borelflow {

/// Borel-plane Taylor coefficients per mode. Index l holds the coefficient of
/// p^l in (H,S)(k,p) = sum_l (H^[l],S^[l])(k) p^l with (H^[0],S^[0]) the
/// p -> 0+ limit (u1, theta1) or (v1, B1).
struct BorelTaylorSeries {
    Problem problem = Problem::boussinesq;
    ModeLattice lattice;
    int order = 0; // attained order L; coefficients 0..L present
    std::vector<SpectralField> primary;
    std::vector<SpectralField> companion;
    bool overflowed = false; // stopped early at the magnitude guard
};

namespace detail {

/// Laplace product weight a!(l-1-a)!/l! (always <= 1).
inline double laplace_weight(int a, int l) {
    if (l <= 20) {
        double num = 1.0;
        // a! (l-1-a)! / l! computed as a descending product to stay exact
        for (int j = 2; j <= a; ++j) num *= j;
        for (int j = 2; j <= l - 1 - a; ++j) num *= j;
        double den = 1.0;
        for (int j = 2; j <= l; ++j) den *= j;
        return num / den;
    }
    return std::exp(std::lgamma(a + 1.0) + std::lgamma(l - a) - std::lgamma(l + 1.0));
}

inline void axpy(SpectralField& y, const SpectralField& x, cplx alpha) {
    for (std::size_t i = 0; i < y.amps.size(); ++i) y.amps[i] += alpha * x.amps[i];
}

constexpr double coeff_magnitude_guard = 1e280;

} // namespace detail

/// Exact Borel-plane Taylor recursion for the Boussinesq pair. Coefficient
/// l = 0 is (u1, theta1); for l >= 0
///   (l+1)(l+2) H^[l+1] = -nu|k|^2 H^[l]
///     - i k_j P_k[u0_j *^ H^[l] + H^[l]_j *^ u0
///                 + sum_{a=0}^{l-1} (a!(l-1-a)!/l!) H^[a]_j *^ H^[l-1-a]]
///     + a P_k[e2 S^[l]]
/// and the companion line with mu, theta0 and no projection.
inline BorelTaylorSeries series_boussinesq(const SpectralField& u0, const SpectralField& theta0,
                                           const SpectralField& forcing,
                                           const PhysicalParams& params, int order) {
    if (order < 1) throw std::invalid_argument("series_boussinesq: order must be >= 1");
    FlowState state(Problem::boussinesq, u0.lattice);
    state.primary = u0;
    state.companion = theta0;
    auto [u1, th1] = first_coeff_boussinesq(state, forcing, params);

    const ModeLattice& lat = u0.lattice;
    const std::size_t m = lat.size();
    const cplx mi{0.0, -1.0};

    BorelTaylorSeries s;
    s.problem = Problem::boussinesq;
    s.lattice = lat;
    s.primary.push_back(std::move(u1));
    s.companion.push_back(std::move(th1));

    for (int l = 0; l < order; ++l) {
        const double denom = static_cast<double>(l + 1) * (l + 2);
        SpectralField gh = advective_contraction(u0, s.primary[l]);
        gh += advective_contraction(s.primary[l], u0);
        SpectralField gs = advective_contraction(u0, s.companion[l]);
        gs += advective_contraction(s.primary[l], theta0);
        for (int a = 0; a <= l - 1; ++a) {
            const cplx w{detail::laplace_weight(a, l), 0.0};
            detail::axpy(gh, advective_contraction(s.primary[a], s.primary[l - 1 - a]), w);
            detail::axpy(gs, advective_contraction(s.primary[a], s.companion[l - 1 - a]), w);
        }
        project_divergence_free(gh);

        SpectralField hnext(lat, FieldKind::vector);
        for (std::size_t i = 0; i < m; ++i)
            for (int c = 0; c < lat.dim; ++c)
                hnext.at(i, c) = (-params.nu * lat.ksq(i) * s.primary[l].at(i, c) +
                                  mi * gh.at(i, c)) / denom;
        detail::axpy(hnext, detail::buoyancy_term(s.companion[l], params.buoyancy_a),
                     cplx{1.0 / denom, 0.0});
        project_divergence_free(hnext);

        SpectralField snext(lat, FieldKind::scalar);
        for (std::size_t i = 0; i < m; ++i)
            snext.at(i, 0) = (-params.mu_thermal * lat.ksq(i) * s.companion[l].at(i, 0) +
                              mi * gs.at(i, 0)) / denom;

        if (std::max(hnext.max_abs(), snext.max_abs()) > detail::coeff_magnitude_guard) {
            s.overflowed = true;
            break;
        }
        s.primary.push_back(std::move(hnext));
        s.companion.push_back(std::move(snext));
    }
    s.order = static_cast<int>(s.primary.size()) - 1;
    return s;
}

/// MHD analogue with the 1/(mu rho) Lorentz coupling and magnetic
/// diffusivity 1/(mu sigma); both component recursions carry P_k.
inline BorelTaylorSeries series_mhd(const SpectralField& v0, const SpectralField& b0,
                                    const SpectralField& forcing, const PhysicalParams& params,
                                    int order) {
    if (order < 1) throw std::invalid_argument("series_mhd: order must be >= 1");
    FlowState state(Problem::mhd, v0.lattice);
    state.primary = v0;
    state.companion = b0;
    auto [v1, b1] = first_coeff_mhd(state, forcing, params);

    const ModeLattice& lat = v0.lattice;
    const std::size_t m = lat.size();
    const cplx mi{0.0, -1.0};
    const cplx pli{0.0, params.lorentz()};
    const double eta = params.eta_mag();

    BorelTaylorSeries s;
    s.problem = Problem::mhd;
    s.lattice = lat;
    s.primary.push_back(std::move(v1));
    s.companion.push_back(std::move(b1));

    for (int l = 0; l < order; ++l) {
        const double denom = static_cast<double>(l + 1) * (l + 2);
        SpectralField gw = advective_contraction(v0, s.primary[l]);
        gw += advective_contraction(s.primary[l], v0);
        SpectralField gb = advective_contraction(b0, s.companion[l]);
        gb += advective_contraction(s.companion[l], b0);
        SpectralField gq1 = advective_contraction(v0, s.companion[l]);
        gq1 += advective_contraction(s.primary[l], b0);
        SpectralField gq2 = advective_contraction(b0, s.primary[l]);
        gq2 += advective_contraction(s.companion[l], v0);
        for (int a = 0; a <= l - 1; ++a) {
            const cplx w{detail::laplace_weight(a, l), 0.0};
            detail::axpy(gw, advective_contraction(s.primary[a], s.primary[l - 1 - a]), w);
            detail::axpy(gb, advective_contraction(s.companion[a], s.companion[l - 1 - a]), w);
            detail::axpy(gq1, advective_contraction(s.primary[a], s.companion[l - 1 - a]), w);
            detail::axpy(gq2, advective_contraction(s.companion[a], s.primary[l - 1 - a]), w);
        }
        project_divergence_free(gw);
        project_divergence_free(gb);
        project_divergence_free(gq1);
        project_divergence_free(gq2);

        SpectralField wnext(lat, FieldKind::vector), qnext(lat, FieldKind::vector);
        for (std::size_t i = 0; i < m; ++i)
            for (int c = 0; c < lat.dim; ++c) {
                wnext.at(i, c) = (-params.nu * lat.ksq(i) * s.primary[l].at(i, c) +
                                  mi * gw.at(i, c) + pli * gb.at(i, c)) / denom;
                qnext.at(i, c) = (-eta * lat.ksq(i) * s.companion[l].at(i, c) +
                                  mi * gq1.at(i, c) - mi * gq2.at(i, c)) / denom;
            }
        project_divergence_free(wnext);
        project_divergence_free(qnext);

        if (std::max(wnext.max_abs(), qnext.max_abs()) > detail::coeff_magnitude_guard) {
            s.overflowed = true;
            break;
        }
        s.primary.push_back(std::move(wnext));
        s.companion.push_back(std::move(qnext));
    }
    s.order = static_cast<int>(s.primary.size()) - 1;
    return s;
}

/// Time-power-series coefficients of the truncated Boussinesq system:
///   u^[m+1] = ( f delta_{m,0} - nu|k|^2 u^[m]
///               - i k_j P_k(sum_l u^[l]_j *^ u^[m-l]) + a P_k(e2 theta^[m]) )/(m+1)
/// Static forcing enters only at m = 0.
inline std::pair<std::vector<SpectralField>, std::vector<SpectralField>>
tspace_series_boussinesq(const SpectralField& u0, const SpectralField& theta0,
                         const SpectralField& forcing, const PhysicalParams& params, int order) {
    const ModeLattice& lat = u0.lattice;
    const std::size_t m = lat.size();
    const cplx mi{0.0, -1.0};
    std::vector<SpectralField> u{u0}, th{theta0};
    for (int mm = 0; mm < order; ++mm) {
        SpectralField nl_u(lat, FieldKind::vector), nl_th(lat, FieldKind::scalar);
        for (int l = 0; l <= mm; ++l) {
            nl_u += advective_contraction(u[l], u[mm - l]);
            nl_th += advective_contraction(u[l], th[mm - l]);
        }
        project_divergence_free(nl_u);
        SpectralField unext(lat, FieldKind::vector), tnext(lat, FieldKind::scalar);
        const double denom = mm + 1;
        for (std::size_t i = 0; i < m; ++i) {
            for (int c = 0; c < lat.dim; ++c)
                unext.at(i, c) = ((mm == 0 ? forcing.at(i, c) : cplx{0, 0}) -
                                  params.nu * lat.ksq(i) * u[mm].at(i, c) + mi * nl_u.at(i, c)) / denom;
            tnext.at(i, 0) = (-params.mu_thermal * lat.ksq(i) * th[mm].at(i, 0) +
                              mi * nl_th.at(i, 0)) / denom;
        }
        detail::axpy(unext, detail::buoyancy_term(th[mm], params.buoyancy_a), cplx{1.0 / denom, 0.0});
        project_divergence_free(unext);
        u.push_back(std::move(unext));
        th.push_back(std::move(tnext));
    }
    return {std::move(u), std::move(th)};
}

/// MHD analogue of the t-space recursion.
inline std::pair<std::vector<SpectralField>, std::vector<SpectralField>>
tspace_series_mhd(const SpectralField& v0, const SpectralField& b0, const SpectralField& forcing,
                  const PhysicalParams& params, int order) {
    const ModeLattice& lat = v0.lattice;
    const std::size_t m = lat.size();
    const cplx mi{0.0, -1.0};
    const cplx pli{0.0, params.lorentz()};
    const double eta = params.eta_mag();
    std::vector<SpectralField> v{v0}, b{b0};
    for (int mm = 0; mm < order; ++mm) {
        SpectralField nl_v(lat, FieldKind::vector), nl_lo(lat, FieldKind::vector);
        SpectralField nl_b1(lat, FieldKind::vector), nl_b2(lat, FieldKind::vector);
        for (int l = 0; l <= mm; ++l) {
            nl_v += advective_contraction(v[l], v[mm - l]);
            nl_lo += advective_contraction(b[l], b[mm - l]);
            nl_b1 += advective_contraction(v[l], b[mm - l]);
            nl_b2 += advective_contraction(b[l], v[mm - l]);
        }
        project_divergence_free(nl_v);
        project_divergence_free(nl_lo);
        project_divergence_free(nl_b1);
        project_divergence_free(nl_b2);
        SpectralField vnext(lat, FieldKind::vector), bnext(lat, FieldKind::vector);
        const double denom = mm + 1;
        for (std::size_t i = 0; i < m; ++i)
            for (int c = 0; c < lat.dim; ++c) {
                vnext.at(i, c) = ((mm == 0 ? forcing.at(i, c) : cplx{0, 0}) -
                                  params.nu * lat.ksq(i) * v[mm].at(i, c) + mi * nl_v.at(i, c) +
                                  pli * nl_lo.at(i, c)) / denom;
                bnext.at(i, c) = (-eta * lat.ksq(i) * b[mm].at(i, c) + mi * nl_b1.at(i, c) -
                                  mi * nl_b2.at(i, c)) / denom;
            }
        project_divergence_free(vnext);
        project_divergence_free(bnext);
        v.push_back(std::move(vnext));
        b.push_back(std::move(bnext));
    }
    return {std::move(v), std::move(b)};
}

struct SeriesEval {
    SpectralField primary;
    SpectralField companion;
    double truncation_error = 0.0; // magnitude of the last retained term at p
};

/// Horner evaluation of the series at p >= 0.
inline SeriesEval eval_series(const BorelTaylorSeries& s, double p) {
    if (p < 0.0) throw std::invalid_argument("eval_series: p must be nonnegative");
    SeriesEval out;
    out.primary = s.primary[static_cast<std::size_t>(s.order)];
    out.companion = s.companion[static_cast<std::size_t>(s.order)];
    const double last = std::max(out.primary.max_abs(), out.companion.max_abs());
    out.truncation_error = last * std::pow(p, s.order);
    for (int l = s.order - 1; l >= 0; --l) {
        for (std::size_t i = 0; i < out.primary.amps.size(); ++i)
            out.primary.amps[i] = s.primary[static_cast<std::size_t>(l)].amps[i] + p * out.primary.amps[i];
        for (std::size_t i = 0; i < out.companion.amps.size(); ++i)
            out.companion.amps[i] = s.companion[static_cast<std::size_t>(l)].amps[i] + p * out.companion.amps[i];
    }
    return out;
}

struct RadiusEstimate {
    bool above_cutoff = false; // superexponential decay: no finite singularity seen
    double radius = 0.0;       // meaningful only when !above_cutoff
};

/// Root-test radius from a linear fit of log||coef_l|| over the top half of
/// the available orders. Decay steeper than geometric (the two half-window
/// slopes disagreeing by more than log 1.35) reports the above-cutoff marker.
inline RadiusEstimate radius_estimate(const BorelTaylorSeries& s, const NormParams& np) {
    if (s.order < 8) throw std::invalid_argument("radius_estimate: need order >= 8");
    const int L = s.order;
    std::vector<double> logc(static_cast<std::size_t>(L) + 1);
    bool any = false;
    for (int l = 0; l <= L; ++l) {
        const double c = field_norm(s.primary[static_cast<std::size_t>(l)],
                                    s.companion[static_cast<std::size_t>(l)], np);
        logc[static_cast<std::size_t>(l)] = c > 0.0 ? std::log(c) : -std::numeric_limits<double>::infinity();
        if (c > 0.0 && l > 0) any = true;
    }
    if (!any) return {true, 0.0};

    auto fit_slope = [&](int lo, int hi) -> double {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int n = 0;
        for (int l = lo; l <= hi; ++l) {
            const double y = logc[static_cast<std::size_t>(l)];
            if (!std::isfinite(y)) return -std::numeric_limits<double>::infinity();
            sx += l; sy += y; sxx += static_cast<double>(l) * l; sxy += l * y;
            ++n;
        }
        return (n * sxy - sx * sy) / (n * sxx - sx * sx);
    };

    const int lo = L / 2;
    const int mid = lo + (L - lo) / 2;
    const double s1 = fit_slope(lo, mid);
    const double s2 = fit_slope(mid, L);
    if (!std::isfinite(s1) || !std::isfinite(s2)) return {true, 0.0}; // exact zeros: entire
    const double slope = fit_slope(lo, L);
    // decaying and still steepening: no geometric tail in sight (the slow
    // log-factorial drift of an entire transform shows up as ~log(l2/l1))
    if (slope < 0.0 && s1 - s2 > std::log(1.15)) return {true, 0.0};
    return {false, std::exp(-slope)};
}

/// Majorant recursion
///   a~_{m+1} = b_m/(m+1) + a a~_m/(m+1) + K1^2 max(nu,mu) (m+1) a~_m
///              + 2 K1 C0 sum a~_l a~_{m-l},
/// dominating the t-series norms; radius bound 1/(K1^2 max(nu,mu)).
struct MajorantSequence {
    std::vector<double> a_tilde;
    double K1 = 0.0;
    double radius_bound = 0.0;
    bool overflowed = false;
};

inline MajorantSequence majorant_sequence(double a0, const std::vector<double>& b, double K1,
                                          const PhysicalParams& params, int order, double c0,
                                          Problem problem = Problem::boussinesq) {
    if (K1 <= 0.0) throw std::invalid_argument("majorant_sequence: K1 must be positive");
    if (a0 < 0.0) throw std::invalid_argument("majorant_sequence: a0 must be nonnegative");
    const double diff = problem == Problem::boussinesq ? params.m1() : params.m2();
    const double a = problem == Problem::boussinesq ? params.buoyancy_a : 0.0;
    MajorantSequence ms;
    ms.K1 = K1;
    ms.radius_bound = 1.0 / (K1 * K1 * diff);
    ms.a_tilde.push_back(a0);
    for (int m = 0; m < order; ++m) {
        const double bm = m < static_cast<int>(b.size()) ? b[static_cast<std::size_t>(m)] : 0.0;
        double conv = 0.0;
        for (int l = 0; l <= m; ++l)
            conv += ms.a_tilde[static_cast<std::size_t>(l)] * ms.a_tilde[static_cast<std::size_t>(m - l)];
        const double am = ms.a_tilde.back();
        const double next = bm / (m + 1) + a * am / (m + 1) + K1 * K1 * diff * (m + 1) * am +
                            2.0 * K1 * c0 * conv;
        if (!std::isfinite(next) || next > 1e280) {
            ms.overflowed = true;
            break;
        }
        ms.a_tilde.push_back(next);
    }
    return ms;
}

} // namespace borelflow

#endif
