// SPDX-License-Identifier: Apache-2.0

#ifndef BORELFLOW_BESSEL_HPP
#define BORELFLOW_BESSEL_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace borelflow {

namespace detail {

// Ascending/asymptotic split. Below the split the ascending series in long
// double keeps the alternating-sum cancellation under 1e-12 relative; above
// it the Hankel expansion truncated at its smallest term is ~1e-12.
inline constexpr double bessel_split = 14.0;

inline long double j1_ascending(long double z) {
    const long double q = z * z / 4.0L;
    long double term = 1.0L; // (z/2) factored out
    long double sum = term;
    for (int m = 1; m < 60; ++m) {
        term *= -q / (static_cast<long double>(m) * (m + 1));
        sum += term;
        if (std::abs(term) < 1e-22L * std::abs(sum) + 1e-30L) break;
    }
    return (z / 2.0L) * sum;
}

// z*Y1(z) by the ascending series; stable down to z = 0 where it equals -2/pi.
inline long double zy1_ascending(long double z) {
    constexpr long double pi = std::numbers::pi_v<long double>;
    constexpr long double egamma = 0.577215664901532860606512090082402431L;
    if (z == 0.0L) return -2.0L / pi;
    const long double q = z * z / 4.0L;
    // sum of h_m (-q)^m / (m! (m+1)!) with h_m = psi(m+1) + psi(m+2)
    long double fact = 1.0L; // (-q)^m / (m!(m+1)!)
    long double hm = -2.0L * egamma + 1.0L;
    long double hsum = hm * fact;
    long double harm = 0.0L; // H_m
    for (int m = 1; m < 60; ++m) {
        fact *= -q / (static_cast<long double>(m) * (m + 1));
        harm += 1.0L / m;
        hm = -2.0L * egamma + 2.0L * harm + 1.0L / (m + 1);
        const long double t = hm * fact;
        hsum += t;
        if (std::abs(t) < 1e-22L * std::abs(hsum) + 1e-30L) break;
    }
    return (2.0L / pi) * std::log(z / 2.0L) * z * j1_ascending(z) - 2.0L / pi -
           (z * z / (2.0L * pi)) * hsum;
}

// Hankel expansion pieces: J1 = sqrt(2/(pi z)) (P cos chi - Q sin chi),
// Y1 = sqrt(2/(pi z)) (P sin chi + Q cos chi), chi = z - 3 pi/4.
inline void hankel_pq(long double z, long double& P, long double& Q) {
    constexpr long double mu = 4.0L; // 4 nu^2 with nu = 1
    long double t = 1.0L;
    P = 1.0L;
    Q = 0.0L;
    long double prev = 1.0L;
    for (int k = 1; k < 40; ++k) {
        const long double odd = 2.0L * k - 1.0L;
        t *= (mu - odd * odd) / (8.0L * z * k);
        if (std::abs(t) > prev) break; // asymptotic tail started growing
        prev = std::abs(t);
        const int phase = (k / 2) % 2; // + + - - + + ...
        const long double s = phase ? -t : t;
        if (k % 2 == 0) P += s; else Q += s;
        if (std::abs(t) < 1e-22L) break;
    }
}

} // namespace detail

/// Bessel function J1 on z >= 0, relative accuracy ~1e-12 on (0, 200].
inline double bessel_j1(double z) {
    if (z < 0.0) throw std::invalid_argument("bessel_j1: negative argument");
    if (z < detail::bessel_split) return static_cast<double>(detail::j1_ascending(z));
    long double P, Q;
    detail::hankel_pq(z, P, Q);
    const long double chi = static_cast<long double>(z) - 3.0L * std::numbers::pi_v<long double> / 4.0L;
    const long double amp = std::sqrt(2.0L / (std::numbers::pi_v<long double> * z));
    return static_cast<double>(amp * (P * std::cos(chi) - Q * std::sin(chi)));
}

/// Bessel function Y1 on z > 0 (logarithmic singularity at 0).
inline double bessel_y1(double z) {
    if (z <= 0.0) throw std::invalid_argument("bessel_y1: argument must be positive");
    if (z < detail::bessel_split) return static_cast<double>(detail::zy1_ascending(z) / z);
    long double P, Q;
    detail::hankel_pq(z, P, Q);
    const long double chi = static_cast<long double>(z) - 3.0L * std::numbers::pi_v<long double> / 4.0L;
    const long double amp = std::sqrt(2.0L / (std::numbers::pi_v<long double> * z));
    return static_cast<double>(amp * (P * std::sin(chi) + Q * std::cos(chi)));
}

/// 2 J1(z)/z with the removable singularity filled (value 1 at z = 0).
inline double two_j1_over_z(double z) {
    if (z < 0.0) throw std::invalid_argument("two_j1_over_z: negative argument");
    if (z >= detail::bessel_split) return 2.0 * bessel_j1(z) / z;
    const long double q = static_cast<long double>(z) * z / 4.0L;
    long double term = 1.0L, sum = 1.0L;
    for (int m = 1; m < 60; ++m) {
        term *= -q / (static_cast<long double>(m) * (m + 1));
        sum += term;
        if (std::abs(term) < 1e-22L * std::abs(sum) + 1e-30L) break;
    }
    return static_cast<double>(sum);
}

/// Green kernel G(z,z') = z' (-J1(z) Y1(z') + Y1(z) J1(z')) for 0 <= z' <= z.
///
/// Three stability branches: a joint small-argument expansion, a small-z'
/// series for z'Y1(z'), and a Wronskian expansion within a relative 1e-3
/// band of the diagonal where the cross products cancel.
inline double kernel_g(double z, double z_prime) {
    constexpr double pi = std::numbers::pi;
    if (z < 0.0 || z_prime < 0.0) throw std::invalid_argument("kernel_g: negative argument");
    if (z_prime > z * (1.0 + 1e-12) + 1e-300)
        throw std::invalid_argument("kernel_g: requires z' <= z");
    z_prime = std::min(z_prime, z);
    if (z == 0.0) return 0.0;

    if (z < 6e-3) {
        // (z/pi) * [small-argument form of (pi/z) G]
        const double r2 = (z_prime * z_prime) / (z * z);
        double h = 1.0 - r2 - (z * z / 8.0) * (1.0 - r2 * r2);
        if (z_prime > 0.0 && z_prime < z) h += 0.5 * z_prime * z_prime * std::log(z / z_prime);
        return (z / pi) * h;
    }
    const double delta = z - z_prime;
    if (delta < 1e-5) {
        // Wronskian expansion about the diagonal where the cross products
        // cancel: G(z,z) = 0, dG/dz'|_{z'=z} = -2/pi, d2G/dz'2|_{z'=z} = -2/(pi z).
        // Quadratic error is ~delta^2/6 relative, the direct formula loses
        // ~eps/delta; an absolute 1e-5 band keeps both under 1e-10.
        return (2.0 / pi) * delta * (1.0 - delta / (2.0 * z));
    }
    if (z_prime < 1e-3) {
        const double w1 = static_cast<double>(detail::zy1_ascending(z_prime)); // z'Y1(z')
        const double w2 = z_prime * ((z_prime < detail::bessel_split)
                                         ? static_cast<double>(detail::j1_ascending(z_prime))
                                         : bessel_j1(z_prime));
        return -bessel_j1(z) * w1 + bessel_y1(z) * w2;
    }
    return z_prime * (-bessel_j1(z) * bessel_y1(z_prime) + bessel_y1(z) * bessel_j1(z_prime));
}

/// Regularized kernel H(p,p',k) = (pi/z) G(z,z') with z = 2 sqrt(ksq_nu p),
/// z' = 2 sqrt(ksq_nu p'). Solves p H_pp + 2 H_p + ksq_nu H = 0 with
/// H -> 0 and H_p -> 1/p as p' -> p-. At ksq_nu = 0 it equals 1 - p'/p.
inline double kernel_h(double p, double p_prime, double ksq_nu) {
    if (p <= 0.0) throw std::invalid_argument("kernel_h: requires p > 0");
    if (p_prime < 0.0 || ksq_nu < 0.0) throw std::invalid_argument("kernel_h: negative argument");
    if (p_prime > p * (1.0 + 1e-12))
        throw std::invalid_argument("kernel_h: requires p' <= p");
    p_prime = std::min(p_prime, p);
    const double z = 2.0 * std::sqrt(ksq_nu * p);
    if (z < 6e-3) {
        // O(z^2) expansion; the correction solves the kernel ODE against 1 - p'/p.
        const double r = p_prime / p;
        double h = 1.0 - r - ksq_nu * 0.5 * (p - p_prime * p_prime / p);
        if (p_prime > 0.0 && p_prime < p) h += ksq_nu * p_prime * std::log(p / p_prime);
        return h;
    }
    const double z_prime = 2.0 * std::sqrt(ksq_nu * p_prime);
    return std::numbers::pi / z * kernel_g(z, z_prime);
}

/// Scanned global suprema of the Green kernel, used by the Lemma-2.4 style
/// constants. Built once per process.
struct KernelTable {
    double sup_G = 0.0;
    double sup_G_over_z = 0.0;
    double z_max_scan = 200.0;
    double grid_resolution = 0.01;
};

inline const KernelTable& kernel_table() {
    static const KernelTable table = [] {
        KernelTable t;
        const int nzp = 201; // 200 interior points of [0, z]
        for (double z = t.grid_resolution; z <= t.z_max_scan + 1e-12; z += t.grid_resolution) {
            const double j1z = bessel_j1(z);
            const double y1z = bessel_y1(z);
            double rowmax = 0.0;
            for (int j = 0; j <= nzp; ++j) {
                const double zp = z * j / nzp;
                double g;
                const double delta = z - zp;
                if (delta < 1e-5) {
                    g = (2.0 / std::numbers::pi) * delta * (1.0 - delta / (2.0 * z));
                } else if (zp < 1e-3) {
                    g = -j1z * static_cast<double>(detail::zy1_ascending(zp)) +
                        y1z * zp * static_cast<double>(detail::j1_ascending(zp));
                } else {
                    g = zp * (-j1z * bessel_y1(zp) + y1z * bessel_j1(zp));
                }
                rowmax = std::max(rowmax, std::abs(g));
            }
            t.sup_G = std::max(t.sup_G, rowmax);
            t.sup_G_over_z = std::max(t.sup_G_over_z, rowmax > 0.0 ? rowmax / z : 0.0);
        }
        // |G/z| peaks as z -> 0 where |G|/z -> (1/pi)(1 - (z'/z)^2); the scan
        // starts at one grid step, so fold in the analytic z -> 0 limit.
        t.sup_G_over_z = std::max(t.sup_G_over_z, 1.0 / std::numbers::pi);
        return t;
    }();
    return table;
}

} // namespace borelflow

#endif
