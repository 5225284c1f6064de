// SPDX-License-Identifier: Apache-2.0

#ifndef BORELFLOW_LATTICE_HPP
#define BORELFLOW_LATTICE_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace borelflow {

using IVec = std::array<int, 3>;    // integer mode multi-index, unused axes 0
using KVec = std::array<double, 3>; // physical wavevector, unused axes 0

/// Finite symmetric wavevector lattice { base * n : |n_i| <= cutoff }.
/// Closed under negation; dense row-major indexing over the index box.
struct ModeLattice {
    double base = 1.0; // fundamental wavevector spacing (kappa_0)
    int cutoff = 1;    // K
    int dim = 2;       // 2 or 3

    ModeLattice() = default;
    ModeLattice(double base_, int cutoff_, int dim_)
        : base(base_), cutoff(cutoff_), dim(dim_) {
        if (base <= 0.0) throw std::invalid_argument("ModeLattice: base must be positive");
        if (cutoff < 0) throw std::invalid_argument("ModeLattice: cutoff must be nonnegative");
        if (dim != 2 && dim != 3) throw std::invalid_argument("ModeLattice: dim must be 2 or 3");
    }

    int side() const { return 2 * cutoff + 1; }

    std::size_t size() const {
        std::size_t s = 1;
        for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(side());
        return s;
    }

    bool contains(const IVec& n) const {
        for (int a = 0; a < dim; ++a)
            if (n[a] < -cutoff || n[a] > cutoff) return false;
        return true;
    }

    std::size_t index(const IVec& n) const {
        std::size_t idx = 0;
        for (int a = 0; a < dim; ++a)
            idx = idx * static_cast<std::size_t>(side()) + static_cast<std::size_t>(n[a] + cutoff);
        return idx;
    }

    IVec multi(std::size_t idx) const {
        IVec n{0, 0, 0};
        for (int a = dim - 1; a >= 0; --a) {
            n[a] = static_cast<int>(idx % static_cast<std::size_t>(side())) - cutoff;
            idx /= static_cast<std::size_t>(side());
        }
        return n;
    }

    KVec wavevector(const IVec& n) const {
        KVec k{0.0, 0.0, 0.0};
        for (int a = 0; a < dim; ++a) k[a] = base * n[a];
        return k;
    }

    KVec wavevector(std::size_t idx) const { return wavevector(multi(idx)); }

    double ksq(const IVec& n) const {
        double s = 0.0;
        for (int a = 0; a < dim; ++a) {
            const double ka = base * n[a];
            s += ka * ka;
        }
        return s;
    }

    double ksq(std::size_t idx) const { return ksq(multi(idx)); }

    double kmag(std::size_t idx) const { return std::sqrt(ksq(idx)); }

    /// Largest |k| on the lattice (box corner).
    double max_kmag() const {
        double s = 0.0;
        for (int a = 0; a < dim; ++a) {
            const double ka = base * cutoff;
            s += ka * ka;
        }
        return std::sqrt(s);
    }

    std::size_t negated_index(std::size_t idx) const {
        IVec n = multi(idx);
        for (int a = 0; a < dim; ++a) n[a] = -n[a];
        return index(n);
    }

    bool operator==(const ModeLattice& o) const {
        return base == o.base && cutoff == o.cutoff && dim == o.dim;
    }
    bool operator!=(const ModeLattice& o) const { return !(*this == o); }
};

} // namespace borelflow

#endif
