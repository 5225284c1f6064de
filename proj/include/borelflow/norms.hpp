// SPDX-License-Identifier: Apache-2.0

#ifndef BORELFLOW_NORMS_HPP
#define BORELFLOW_NORMS_HPP

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "borelflow/bessel.hpp"
#include "borelflow/field.hpp"
#include "borelflow/grid.hpp"

namespace borelflow {

enum class NormKind { gamma_beta, l1_linf };

/// Weighted-sup norm parameters. With beta = 0 the weight (1+|k|)^gamma needs
/// gamma > dim for the convolution algebra; beta > 0 relaxes that.
struct NormParams {
    NormKind kind = NormKind::l1_linf;
    double gamma = 3.0;
    double beta = 0.0;
    int dim = 2;

    void validate() const {
        if (dim != 2 && dim != 3) throw std::invalid_argument("NormParams: dim must be 2 or 3");
        if (beta < 0.0) throw std::invalid_argument("NormParams: beta must be nonnegative");
        if (kind == NormKind::gamma_beta) {
            if (beta == 0.0 && gamma <= dim)
                throw std::invalid_argument("NormParams: beta = 0 requires gamma > dim");
            if (beta > 0.0 && gamma < 0.0)
                throw std::invalid_argument("NormParams: gamma must be nonnegative");
        }
    }
};

/// All named constants consumed by the growth and series bounds.
struct ConstantsBundle {
    double c0 = 1.0;           // convolution algebra constant
    double c2 = 0.0;           // Boussinesq kernel constant
    double c3 = 0.0;           // buoyancy kernel constant
    double c4 = 0.0;           // magnetic kernel constant
    double m0 = 0.0;           // Laplace-convolution weight constant (~3.76)
    double m1 = 0.0, m2 = 0.0, m3 = 0.0;
};

/// Q_n(y) = sum_{j<=n} 2^{n-j} y^j / j!. Direct evaluation below n = 120,
/// log-space accumulation above to dodge 2^n overflow.
inline double q_poly(int n, double y) {
    if (n < 0) throw std::invalid_argument("q_poly: negative order");
    if (y < 0.0) throw std::invalid_argument("q_poly: negative argument");
    if (n <= 120) {
        double term = std::pow(2.0, n);
        double sum = term;
        for (int j = 1; j <= n; ++j) {
            term *= y / (2.0 * j);
            sum += term;
        }
        return sum;
    }
    // log-sum-exp
    const double l2 = std::numbers::ln2;
    const double ly = y > 0.0 ? std::log(y) : -std::numeric_limits<double>::infinity();
    double lmax = -std::numeric_limits<double>::infinity();
    std::vector<double> lt(static_cast<std::size_t>(n) + 1);
    for (int j = 0; j <= n; ++j) {
        lt[j] = (n - j) * l2 + (j > 0 ? j * ly - std::lgamma(j + 1.0) : 0.0);
        lmax = std::max(lmax, lt[j]);
    }
    double s = 0.0;
    for (int j = 0; j <= n; ++j) s += std::exp(lt[j] - lmax);
    return std::exp(lmax) * s;
}

namespace detail {

inline double norm_weight(const NormParams& np, double kmag) {
    if (np.kind == NormKind::l1_linf) return 1.0;
    return std::pow(1.0 + kmag, np.gamma) * std::exp(np.beta * kmag);
}

/// Norm from per-mode magnitudes.
inline double norm_from_mags(const ModeLattice& lat, const std::vector<double>& mags,
                             const NormParams& np) {
    if (np.kind == NormKind::gamma_beta) {
        double sup = 0.0;
        for (std::size_t i = 0; i < mags.size(); ++i)
            if (mags[i] != 0.0) sup = std::max(sup, norm_weight(np, lat.kmag(i)) * mags[i]);
        return sup;
    }
    double l1 = 0.0, linf = 0.0;
    for (double m : mags) {
        l1 += m;
        linf = std::max(linf, m);
    }
    return std::max(l1, linf);
}

} // namespace detail

/// ||f||_N of one field: sup_k (1+|k|)^gamma e^{beta|k|} |f(k)| or the
/// counting-measure max(L1, Linf).
inline double field_norm(const SpectralField& f, const NormParams& np) {
    np.validate();
    std::vector<double> mags(f.lattice.size());
    for (std::size_t i = 0; i < mags.size(); ++i) mags[i] = f.mode_mag(i);
    return detail::norm_from_mags(f.lattice, mags, np);
}

/// Pair norm ||(f,g)||_N with components stacked into one Euclidean magnitude
/// per mode before weighting.
inline double field_norm(const SpectralField& f, const SpectralField& g, const NormParams& np) {
    np.validate();
    if (f.lattice != g.lattice) throw std::invalid_argument("field_norm: lattice mismatch");
    std::vector<double> mags(f.lattice.size());
    for (std::size_t i = 0; i < mags.size(); ++i) {
        const double a = f.mode_mag(i), b = g.mode_mag(i);
        mags[i] = std::sqrt(a * a + b * b);
    }
    return detail::norm_from_mags(f.lattice, mags, np);
}

inline double field_norm(const FlowState& st, const NormParams& np) {
    return field_norm(st.primary, st.companion, np);
}

/// Convolution algebra constant: C0 = 1 for L1 n Linf; the dimension formula
/// for the (gamma, beta) norm, which has poles at gamma <= dim.
inline double c0_constant(const NormParams& np) {
    np.validate();
    if (np.kind == NormKind::l1_linf) return 1.0;
    const double g = np.gamma;
    if (np.dim == 2) {
        if (g <= 2.0) throw std::invalid_argument("c0_constant: gamma must exceed 2 for d = 2");
        return std::numbers::pi * std::pow(2.0, g + 2.0) / ((g - 1.0) * (g - 2.0));
    }
    if (g <= 3.0) throw std::invalid_argument("c0_constant: gamma must exceed 3 for d = 3");
    return std::numbers::pi * std::pow(2.0, g + 4.0) / ((g - 1.0) * (g - 2.0) * (g - 3.0));
}

namespace detail {

/// int_0^p (1+p^2)/((1+s^2)(1+(p-s)^2)) ds by composite Gauss-Legendre.
inline double m0_integrand(double p) {
    static const double gx[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                 -0.1834346424956498, 0.1834346424956498, 0.5255324099163290,
                                 0.7966664774136267, 0.9602898564975363};
    static const double gw[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                 0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                 0.2223810344533745, 0.1012285362903763};
    const int panels = std::max(8, static_cast<int>(p));
    double acc = 0.0;
    for (int q = 0; q < panels; ++q) {
        const double a = p * q / panels, b = p * (q + 1) / panels;
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (int i = 0; i < 8; ++i) {
            const double s = mid + half * gx[i];
            acc += half * gw[i] / ((1.0 + s * s) * (1.0 + (p - s) * (p - s)));
        }
    }
    return (1.0 + p * p) * acc;
}

} // namespace detail

/// M0 = sup_p int_0^p (1+p^2)/((1+s^2)(1+(p-s)^2)) ds, located numerically
/// (coarse scan + golden section on [0, 50]) and cached.
inline double m0_constant() {
    static const double m0 = [] {
        double best_p = 0.0, best = 0.0;
        for (double p = 0.25; p <= 50.0; p += 0.25) {
            const double v = detail::m0_integrand(p);
            if (v > best) { best = v; best_p = p; }
        }
        double a = std::max(0.0, best_p - 0.5), b = std::min(50.0, best_p + 0.5);
        const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
        double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
        double f1 = detail::m0_integrand(x1), f2 = detail::m0_integrand(x2);
        for (int it = 0; it < 80 && (b - a) > 1e-12; ++it) {
            if (f1 < f2) {
                a = x1; x1 = x2; f1 = f2;
                x2 = a + gr * (b - a); f2 = detail::m0_integrand(x2);
            } else {
                b = x2; x2 = x1; f2 = f1;
                x1 = b - gr * (b - a); f1 = detail::m0_integrand(x1);
            }
        }
        return std::max({best, f1, f2});
    }();
    return m0;
}

/// Kernel-integral constants:
///   C2 = pi C0 sup|G| / min(sqrt(nu), sqrt(mu)),
///   C3 = pi a sup|G/z|,
///   C4 = 2 pi max(1/sqrt(nu), sqrt(mu sigma)) max(1, 1/(mu rho)) C0 sup|G|,
/// plus M0..M3.
inline ConstantsBundle lemma24_constants(const PhysicalParams& phys, const NormParams& np,
                                         const KernelTable& table) {
    phys.validate();
    ConstantsBundle cb;
    cb.c0 = c0_constant(np);
    const double pi = std::numbers::pi;
    cb.c2 = pi * cb.c0 * table.sup_G / std::min(std::sqrt(phys.nu), std::sqrt(phys.mu_thermal));
    cb.c3 = pi * phys.buoyancy_a * table.sup_G_over_z;
    cb.c4 = 2.0 * pi * std::max(1.0 / std::sqrt(phys.nu), std::sqrt(phys.mu_mag * phys.sigma)) *
            std::max(1.0, 1.0 / (phys.mu_mag * phys.rho)) * cb.c0 * table.sup_G;
    cb.m0 = m0_constant();
    cb.m1 = phys.m1();
    cb.m2 = phys.m2();
    cb.m3 = phys.m3();
    return cb;
}

/// Grid-restricted p-weighted norms of a Borel solution:
///   sup_p (1+p^2) e^{-alpha p} ||(H,S)(.,p)||_N   and
///   int e^{-alpha p} ||(H,S)(.,p)||_N dp  (trapezoid, no tail term).
inline std::pair<double, double> pgrid_weighted_norms(const BorelSolution& sol, double alpha,
                                                      const NormParams& np) {
    if (sol.nodes() == 0) throw std::invalid_argument("pgrid_weighted_norms: empty grid");
    const std::size_t n = sol.nodes();
    std::vector<double> fn(n);
    for (std::size_t i = 0; i < n; ++i) fn[i] = field_norm(sol.primary[i], sol.companion[i], np);
    double sup = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double p = sol.grid.nodes[i];
        sup = std::max(sup, (1.0 + p * p) * std::exp(-alpha * p) * fn[i]);
    }
    double l1 = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = sol.grid.nodes[i + 1] - sol.grid.nodes[i];
        l1 += 0.5 * h * (std::exp(-alpha * sol.grid.nodes[i]) * fn[i] +
                         std::exp(-alpha * sol.grid.nodes[i + 1]) * fn[i + 1]);
    }
    return {sup, l1};
}

} // namespace borelflow

#endif
