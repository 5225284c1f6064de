// SPDX-License-Identifier: Apache-2.0

#ifndef BORELFLOW_GRID_HPP
#define BORELFLOW_GRID_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "borelflow/errors.hpp"
#include "borelflow/field.hpp"

namespace borelflow {

/// Graded p-grid: node_i = p_max (i/n)^grading, i = 0..n.
struct BorelGrid {
    std::vector<double> nodes;
    double grading = 1.0;
    double p_max = 0.0;

    std::size_t count() const { return nodes.size(); }
    bool uniform() const { return grading == 1.0; }
};

inline BorelGrid build_grid(double p_max, int n, double grading = 1.0) {
    if (p_max <= 0.0) throw std::invalid_argument("build_grid: p_max must be positive");
    if (n < 1) throw std::invalid_argument("build_grid: need at least one interval");
    if (grading < 1.0) throw std::invalid_argument("build_grid: grading must be >= 1");
    BorelGrid g;
    g.grading = grading;
    g.p_max = p_max;
    g.nodes.resize(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i)
        g.nodes[static_cast<std::size_t>(i)] = p_max * std::pow(static_cast<double>(i) / n, grading);
    g.nodes.front() = 0.0;
    g.nodes.back() = p_max;
    return g;
}

namespace detail {

/// Trapezoid weights over nodes[0..n].
inline std::vector<double> trapezoid_weights(const std::vector<double>& nodes, std::size_t n) {
    std::vector<double> w(n + 1, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const double h = nodes[j + 1] - nodes[j];
        w[j] += 0.5 * h;
        w[j + 1] += 0.5 * h;
    }
    return w;
}

struct InterpCoeff {
    std::size_t i0 = 0, i1 = 0;
    double c0 = 1.0, c1 = 0.0;
};

/// Piecewise-linear interpolation stencil for a point q inside the grid range.
inline InterpCoeff interp_coeff(const std::vector<double>& nodes, double q) {
    InterpCoeff ic;
    if (q <= nodes.front()) { ic.i0 = ic.i1 = 0; ic.c0 = 1.0; ic.c1 = 0.0; return ic; }
    if (q >= nodes.back()) { ic.i0 = ic.i1 = nodes.size() - 1; ic.c0 = 1.0; ic.c1 = 0.0; return ic; }
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), q);
    const std::size_t hi = static_cast<std::size_t>(it - nodes.begin());
    const std::size_t lo = hi - 1;
    const double h = nodes[hi] - nodes[lo];
    ic.i0 = lo;
    ic.i1 = hi;
    ic.c1 = h > 0.0 ? (q - nodes[lo]) / h : 0.0;
    ic.c0 = 1.0 - ic.c1;
    return ic;
}

} // namespace detail

/// Laplace convolution (f * g)(p_n) = int_0^{p_n} f(s) g(p_n - s) ds by
/// trapezoidal product quadrature; off-node values of g are piecewise-linear
/// interpolants. Second-order accurate.
template <typename T>
inline T laplace_convolve(const std::vector<T>& f_samples, const std::vector<T>& g_samples,
                          const BorelGrid& grid, std::size_t n) {
    if (n >= grid.count())
        throw std::invalid_argument("laplace_convolve: node index out of range");
    if (f_samples.size() <= n || g_samples.size() <= n)
        throw std::invalid_argument("laplace_convolve: samples missing at nodes 0..n");
    const double pn = grid.nodes[n];
    const auto w = detail::trapezoid_weights(grid.nodes, n);
    T acc{};
    for (std::size_t j = 0; j <= n; ++j) {
        const auto ic = detail::interp_coeff(grid.nodes, pn - grid.nodes[j]);
        const T gval = g_samples[ic.i0] * ic.c0 + g_samples[ic.i1] * ic.c1;
        acc += f_samples[j] * gval * w[j];
    }
    return acc;
}

/// Samples of a Borel-plane solution pair on a grid: primary (H or W) and
/// companion (S or Q) fields per node. Node 0 holds the p -> 0+ limit
/// (u1, theta1) or (v1, B1). The problem instance (data, forcing, physical
/// parameters) travels with the samples so residual and reconstruction
/// passes are self-contained.
struct BorelSolution {
    Problem problem = Problem::boussinesq;
    ModeLattice lattice;
    BorelGrid grid;
    std::vector<SpectralField> primary;
    std::vector<SpectralField> companion;
    int seed_order = 0;
    SpectralField data0_primary;
    SpectralField data0_companion;
    SpectralField forcing;
    PhysicalParams params;

    std::size_t nodes() const { return grid.count(); }

    /// Euclidean magnitude of the stacked (primary, companion) pair at one node/mode.
    double pair_mag(std::size_t node, std::size_t mode) const {
        double s = 0.0;
        for (int c = 0; c < primary[node].comps(); ++c) s += std::norm(primary[node].at(mode, c));
        for (int c = 0; c < companion[node].comps(); ++c) s += std::norm(companion[node].at(mode, c));
        return std::sqrt(s);
    }
};

} // namespace borelflow

#endif
