// SPDX-License-Identifier: Apache-2.0

#ifndef BORELFLOW_TESTUTIL_HPP
#define BORELFLOW_TESTUTIL_HPP

#include <random>

#include "borelflow/borelflow.hpp"

namespace borelflow::testutil {

inline ModeLattice lat2(double base = 1.0, int cutoff = 2) { return ModeLattice(base, cutoff, 2); }

/// Deterministic uniform in [lo, hi); mt19937_64 bits mapped directly so the
/// stream is platform-stable.
struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}
    double unif(double lo = -1.0, double hi = 1.0) {
        return lo + (hi - lo) * (static_cast<double>(gen() >> 11) * 0x1.0p-53);
    }
    cplx c() { return cplx{unif(), unif()}; }
};

/// Shear mode A cos(k.x) e_dir as the conjugate pair +-n with amplitude A/2.
inline SpectralField shear_mode(const ModeLattice& lat, const IVec& n, int dir, double amplitude) {
    SpectralField f(lat, FieldKind::vector);
    IVec neg = n;
    for (int a = 0; a < lat.dim; ++a) neg[a] = -neg[a];
    f.at(n, dir) = cplx{amplitude / 2.0, 0.0};
    f.at(neg, dir) = cplx{amplitude / 2.0, 0.0};
    return f;
}

/// Scalar cosine mode A cos(k.x).
inline SpectralField scalar_mode(const ModeLattice& lat, const IVec& n, double amplitude) {
    SpectralField f(lat, FieldKind::scalar);
    IVec neg = n;
    for (int a = 0; a < lat.dim; ++a) neg[a] = -neg[a];
    f.at(n, 0) = cplx{amplitude / 2.0, 0.0};
    f.at(neg, 0) = cplx{amplitude / 2.0, 0.0};
    return f;
}

/// Conjugate-symmetric random scalar field.
inline SpectralField random_scalar(const ModeLattice& lat, Rng& rng, double scale = 1.0) {
    SpectralField f(lat, FieldKind::scalar);
    for (std::size_t i = 0; i < lat.size(); ++i) {
        const std::size_t ni = lat.negated_index(i);
        if (ni < i) continue;
        cplx v = scale * rng.c();
        if (ni == i) v = cplx{v.real(), 0.0};
        f.at(i, 0) = v;
        f.at(ni, 0) = std::conj(v);
    }
    return f;
}

/// Conjugate-symmetric, divergence-free random vector field (projected).
inline SpectralField random_divfree(const ModeLattice& lat, Rng& rng, double scale = 1.0) {
    SpectralField f(lat, FieldKind::vector);
    for (std::size_t i = 0; i < lat.size(); ++i) {
        const std::size_t ni = lat.negated_index(i);
        if (ni < i) continue;
        for (int c = 0; c < lat.dim; ++c) {
            cplx v = scale * rng.c();
            if (ni == i) v = cplx{v.real(), 0.0};
            f.at(i, c) = v;
            f.at(ni, c) = std::conj(v);
        }
    }
    project_divergence_free(f);
    return f;
}

/// Brute-force truncated convolution oracle, written independently of the
/// production kernel (explicit double loop over index tuples).
inline SpectralField convolve_oracle(const SpectralField& f, const SpectralField& g) {
    const ModeLattice& lat = f.lattice;
    SpectralField out(lat, FieldKind::scalar);
    for (std::size_t ia = 0; ia < lat.size(); ++ia) {
        const IVec na = lat.multi(ia);
        for (std::size_t ib = 0; ib < lat.size(); ++ib) {
            const IVec nb = lat.multi(ib);
            IVec ns{0, 0, 0};
            for (int a = 0; a < lat.dim; ++a) ns[a] = na[a] + nb[a];
            if (!lat.contains(ns)) continue;
            out.at(ns, 0) += f.at(ia, 0) * g.at(ib, 0);
        }
    }
    return out;
}

inline double max_diff(const SpectralField& a, const SpectralField& b) {
    double w = 0.0;
    for (std::size_t i = 0; i < a.amps.size(); ++i)
        w = std::max(w, std::abs(a.amps[i] - b.amps[i]));
    return w;
}

} // namespace borelflow::testutil

#endif
