// SPDX-License-Identifier: Apache-2.0

#ifndef BORELFLOW_FIELD_HPP
#define BORELFLOW_FIELD_HPP

#include <atomic>
#include <complex>
#include <span>
#include <vector>

#include "borelflow/errors.hpp"
#include "borelflow/lattice.hpp"
#include "borelflow/parallel.hpp"
#include "borelflow/params.hpp"

namespace borelflow {

/// Process-wide worker count for the convolution kernels. Outputs are
/// independent per mode, so the result does not depend on this value.
inline std::atomic<int>& convolution_workers() {
    static std::atomic<int> value{1};
    return value;
}

using cplx = std::complex<double>;

enum class FieldKind { vector, scalar };

/// Lattice field of complex amplitudes, dense over the index box.
///
/// Layout is mode-major: amps[mode * comps + c]. Vector fields carry dim
/// components and must be divergence-free with zero k=0 amplitude; scalar
/// fields carry one component and may have a zero mode.
struct SpectralField {
    ModeLattice lattice;
    FieldKind kind = FieldKind::scalar;
    std::vector<cplx> amps;

    SpectralField() = default;
    SpectralField(const ModeLattice& lat, FieldKind k)
        : lattice(lat), kind(k), amps(lat.size() * static_cast<std::size_t>(k == FieldKind::vector ? lat.dim : 1)) {}

    static SpectralField zero(const ModeLattice& lat, FieldKind k) { return SpectralField(lat, k); }

    int comps() const { return kind == FieldKind::vector ? lattice.dim : 1; }

    cplx& at(std::size_t mode, int c = 0) { return amps[mode * static_cast<std::size_t>(comps()) + c]; }
    const cplx& at(std::size_t mode, int c = 0) const { return amps[mode * static_cast<std::size_t>(comps()) + c]; }
    cplx& at(const IVec& n, int c = 0) { return at(lattice.index(n), c); }
    const cplx& at(const IVec& n, int c = 0) const { return at(lattice.index(n), c); }

    /// Euclidean magnitude of the stacked components at one mode.
    double mode_mag(std::size_t mode) const {
        double s = 0.0;
        for (int c = 0; c < comps(); ++c) s += std::norm(at(mode, c));
        return std::sqrt(s);
    }

    double max_abs() const {
        double m = 0.0;
        for (const cplx& a : amps) m = std::max(m, std::abs(a));
        return m;
    }

    SpectralField& operator+=(const SpectralField& o) {
        for (std::size_t i = 0; i < amps.size(); ++i) amps[i] += o.amps[i];
        return *this;
    }
    SpectralField& operator*=(cplx s) {
        for (cplx& a : amps) a *= s;
        return *this;
    }

    /// Largest deviation from amplitude(-k) == conj(amplitude(k)).
    double conj_symmetry_defect() const {
        double worst = 0.0;
        for (std::size_t i = 0; i < lattice.size(); ++i) {
            const std::size_t j = lattice.negated_index(i);
            for (int c = 0; c < comps(); ++c)
                worst = std::max(worst, std::abs(at(i, c) - std::conj(at(j, c))));
        }
        return worst;
    }

    /// Largest |k . amp(k)| relative to |k||amp(k)| over nonzero modes; 0 for scalars.
    double divergence_defect() const {
        if (kind != FieldKind::vector) return 0.0;
        double worst = 0.0;
        for (std::size_t i = 0; i < lattice.size(); ++i) {
            const KVec k = lattice.wavevector(i);
            const double km = lattice.kmag(i);
            if (km == 0.0) continue;
            cplx dot{0.0, 0.0};
            for (int c = 0; c < comps(); ++c) dot += k[c] * at(i, c);
            const double mag = mode_mag(i);
            if (mag > 0.0) worst = std::max(worst, std::abs(dot) / (km * mag));
        }
        return worst;
    }

    void require_divergence_free(double tol, const char* who) const {
        if (kind != FieldKind::vector) return;
        if (divergence_defect() > tol)
            throw std::invalid_argument(std::string(who) + ": field is not divergence-free");
        const std::size_t zero = lattice.index(IVec{0, 0, 0});
        if (mode_mag(zero) > 0.0)
            throw std::invalid_argument(std::string(who) + ": vector field carries a zero mode");
    }
};

/// Primary/companion pair on a shared lattice: (u, theta) or (v, B).
struct FlowState {
    Problem problem = Problem::boussinesq;
    SpectralField primary;   // vector
    SpectralField companion; // scalar (boussinesq) or vector (mhd)

    FlowState() = default;
    FlowState(Problem pb, const ModeLattice& lat)
        : problem(pb),
          primary(lat, FieldKind::vector),
          companion(lat, pb == Problem::boussinesq ? FieldKind::scalar : FieldKind::vector) {}

    void check_consistent() const {
        if (primary.lattice != companion.lattice)
            throw std::invalid_argument("FlowState: fields must share a lattice");
        if (primary.kind != FieldKind::vector)
            throw std::invalid_argument("FlowState: primary field must be a vector field");
        const FieldKind want = problem == Problem::boussinesq ? FieldKind::scalar : FieldKind::vector;
        if (companion.kind != want)
            throw std::invalid_argument("FlowState: companion kind does not match the problem tag");
    }
};

/// P_k v = v - k (k.v)/|k|^2. The zero wavevector is rejected.
inline std::array<cplx, 3> hodge_project(const KVec& k, const std::array<cplx, 3>& v, int dim) {
    double ksq = 0.0;
    for (int a = 0; a < dim; ++a) ksq += k[a] * k[a];
    if (ksq == 0.0) throw std::invalid_argument("hodge_project: zero wavevector");
    cplx kv{0.0, 0.0};
    for (int a = 0; a < dim; ++a) kv += k[a] * v[a];
    std::array<cplx, 3> out{cplx{0, 0}, cplx{0, 0}, cplx{0, 0}};
    for (int a = 0; a < dim; ++a) out[a] = v[a] - k[a] * kv / ksq;
    return out;
}

/// Apply P_k to every nonzero mode of a vector field and zero the k=0 amplitude.
inline void project_divergence_free(SpectralField& f) {
    if (f.kind != FieldKind::vector) return;
    const int d = f.lattice.dim;
    for (std::size_t i = 0; i < f.lattice.size(); ++i) {
        const KVec k = f.lattice.wavevector(i);
        if (f.lattice.ksq(i) == 0.0) {
            for (int c = 0; c < d; ++c) f.at(i, c) = cplx{0, 0};
            continue;
        }
        std::array<cplx, 3> v{cplx{0, 0}, cplx{0, 0}, cplx{0, 0}};
        for (int c = 0; c < d; ++c) v[c] = f.at(i, c);
        const auto w = hodge_project(k, v, d);
        for (int c = 0; c < d; ++c) f.at(i, c) = w[c];
    }
}

namespace detail {

/// Truncated convolution of one component pair:
/// out(k) = sum_{k'} a(k') b(k-k'), products outside the lattice discarded.
/// out must not alias a or b. Axis-explicit loops keep the inner accumulation
/// contiguous; this is the hot loop of the whole artifact.
/// Gather form, one output row per task: used when workers > 1.
inline void convolve_arrays_parallel(const ModeLattice& lat, std::span<const cplx> a,
                                     std::span<const cplx> b, std::span<cplx> out, int workers) {
    const int S = lat.side();
    const int K = lat.cutoff;
    const std::size_t rows = lat.size() / static_cast<std::size_t>(S);
    parallel_for(0, rows, [&](std::size_t row) {
        // row encodes all leading axes; the trailing axis is contiguous
        const int o0 = lat.dim == 2 ? static_cast<int>(row)
                                    : static_cast<int>(row / static_cast<std::size_t>(S));
        const int o1 = lat.dim == 2 ? -1 : static_cast<int>(row % static_cast<std::size_t>(S));
        cplx* orow = &out[row * static_cast<std::size_t>(S)];
        std::fill(orow, orow + S, cplx{0, 0});
        const int lo0 = std::max(0, o0 - S + 1 + K), hi0 = std::min(S - 1, o0 + K);
        for (int a0 = lo0; a0 <= hi0; ++a0) {
            const int b0 = o0 - a0 + K;
            if (lat.dim == 2) {
                const cplx* arow = &a[static_cast<std::size_t>(a0) * S];
                const cplx* brow = &b[static_cast<std::size_t>(b0) * S];
                for (int a1 = 0; a1 < S; ++a1) {
                    const cplx va = arow[a1];
                    if (va == cplx{0, 0}) continue;
                    const int lo = std::max(0, a1 - K), hi = std::min(S - 1, a1 + K);
                    for (int o1i = lo; o1i <= hi; ++o1i) orow[o1i] += va * brow[o1i - a1 + K];
                }
            } else {
                const int lo1 = std::max(0, o1 - S + 1 + K), hi1 = std::min(S - 1, o1 + K);
                for (int a1 = lo1; a1 <= hi1; ++a1) {
                    const int b1 = o1 - a1 + K;
                    const cplx* arow = &a[(static_cast<std::size_t>(a0) * S + a1) * S];
                    const cplx* brow = &b[(static_cast<std::size_t>(b0) * S + b1) * S];
                    for (int a2 = 0; a2 < S; ++a2) {
                        const cplx va = arow[a2];
                        if (va == cplx{0, 0}) continue;
                        const int lo = std::max(0, a2 - K), hi = std::min(S - 1, a2 + K);
                        for (int o2 = lo; o2 <= hi; ++o2) orow[o2] += va * brow[o2 - a2 + K];
                    }
                }
            }
        }
    }, workers);
}

inline void convolve_arrays(const ModeLattice& lat, std::span<const cplx> a,
                            std::span<const cplx> b, std::span<cplx> out) {
    const int workers = convolution_workers().load(std::memory_order_relaxed);
    if (workers > 1 && lat.size() >= 4096) {
        convolve_arrays_parallel(lat, a, b, out, workers);
        return;
    }
    std::fill(out.begin(), out.end(), cplx{0, 0});
    const int S = lat.side();
    const int K = lat.cutoff;
    if (lat.dim == 2) {
        for (int a0 = 0; a0 < S; ++a0) {
            const int lo0 = std::max(0, K - a0), hi0 = std::min(S - 1, S - 1 + K - a0);
            for (int a1 = 0; a1 < S; ++a1) {
                const cplx va = a[static_cast<std::size_t>(a0) * S + a1];
                if (va == cplx{0, 0}) continue;
                const int lo1 = std::max(0, K - a1), hi1 = std::min(S - 1, S - 1 + K - a1);
                for (int b0 = lo0; b0 <= hi0; ++b0) {
                    const cplx* brow = &b[static_cast<std::size_t>(b0) * S];
                    cplx* orow = &out[static_cast<std::size_t>(a0 + b0 - K) * S + (a1 - K)];
                    for (int b1 = lo1; b1 <= hi1; ++b1) orow[b1] += va * brow[b1];
                }
            }
        }
        return;
    }
    // dim == 3
    for (int a0 = 0; a0 < S; ++a0) {
        const int lo0 = std::max(0, K - a0), hi0 = std::min(S - 1, S - 1 + K - a0);
        for (int a1 = 0; a1 < S; ++a1) {
            const int lo1 = std::max(0, K - a1), hi1 = std::min(S - 1, S - 1 + K - a1);
            for (int a2 = 0; a2 < S; ++a2) {
                const cplx va = a[(static_cast<std::size_t>(a0) * S + a1) * S + a2];
                if (va == cplx{0, 0}) continue;
                const int lo2 = std::max(0, K - a2), hi2 = std::min(S - 1, S - 1 + K - a2);
                for (int b0 = lo0; b0 <= hi0; ++b0)
                    for (int b1 = lo1; b1 <= hi1; ++b1) {
                        const cplx* brow = &b[(static_cast<std::size_t>(b0) * S + b1) * S];
                        cplx* orow = &out[(static_cast<std::size_t>(a0 + b0 - K) * S + (a1 + b1 - K)) * S + (a2 - K)];
                        for (int b2 = lo2; b2 <= hi2; ++b2) orow[b2] += va * brow[b2];
                    }
            }
        }
    }
}

/// Component view of a field.
inline std::vector<cplx> component(const SpectralField& f, int c) {
    const std::size_t m = f.lattice.size();
    std::vector<cplx> out(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = f.at(i, c);
    return out;
}

} // namespace detail

/// Truncated Fourier convolution of two scalar fields on a shared lattice.
inline SpectralField convolve(const SpectralField& f, const SpectralField& g) {
    if (f.lattice != g.lattice) throw std::invalid_argument("convolve: lattice mismatch");
    if (f.kind != FieldKind::scalar || g.kind != FieldKind::scalar)
        throw std::invalid_argument("convolve: defined for scalar fields; use advective_contraction for vectors");
    SpectralField out(f.lattice, FieldKind::scalar);
    detail::convolve_arrays(f.lattice, f.amps, g.amps, out.amps);
    return out;
}

/// A_c(k) = sum_j k_j (F_j *^ G_c)(k) for a divergence-free vector F and any G.
/// This is the contraction entering every advective term; callers attach the
/// -i factor and the Hodge projection.
inline SpectralField advective_contraction(const SpectralField& F, const SpectralField& G) {
    if (F.lattice != G.lattice) throw std::invalid_argument("advective_contraction: lattice mismatch");
    if (F.kind != FieldKind::vector) throw std::invalid_argument("advective_contraction: F must be a vector field");
    const ModeLattice& lat = F.lattice;
    const int d = lat.dim;
    const int gc = G.comps();
    const std::size_t m = lat.size();
    SpectralField out(lat, G.kind);
    std::vector<cplx> conv(m);
    for (int c = 0; c < gc; ++c) {
        const auto gcomp = detail::component(G, c);
        for (int j = 0; j < d; ++j) {
            const auto fj = detail::component(F, j);
            detail::convolve_arrays(lat, fj, gcomp, conv);
            for (std::size_t i = 0; i < m; ++i) {
                const KVec k = lat.wavevector(i);
                out.at(i, c) += k[j] * conv[i];
            }
        }
    }
    return out;
}

namespace detail {

inline SpectralField buoyancy_term(const SpectralField& theta, double a) {
    // a P_k[e2 theta]: lift the scalar along e2, project.
    SpectralField out(theta.lattice, FieldKind::vector);
    const std::size_t m = theta.lattice.size();
    for (std::size_t i = 0; i < m; ++i) out.at(i, 1) = a * theta.at(i, 0);
    project_divergence_free(out);
    return out;
}

} // namespace detail

/// First Borel coefficients of the Boussinesq system:
///   u1 = -nu |k|^2 u0 - i k_j P_k[u0_j *^ u0] + a P_k[e2 theta0] + f
///   theta1 = -mu |k|^2 theta0 - i k_j (u0_j *^ theta0)
inline std::pair<SpectralField, SpectralField>
first_coeff_boussinesq(const FlowState& state, const SpectralField& forcing,
                       const PhysicalParams& params) {
    state.check_consistent();
    if (state.problem != Problem::boussinesq)
        throw std::invalid_argument("first_coeff_boussinesq: state is not boussinesq");
    params.validate();
    constexpr double div_tol = 1e-10;
    state.primary.require_divergence_free(div_tol, "first_coeff_boussinesq(u0)");
    forcing.require_divergence_free(div_tol, "first_coeff_boussinesq(f)");

    const ModeLattice& lat = state.primary.lattice;
    const std::size_t m = lat.size();
    const cplx mi{0.0, -1.0};

    SpectralField u1 = advective_contraction(state.primary, state.primary);
    project_divergence_free(u1);
    u1 *= mi;
    for (std::size_t i = 0; i < m; ++i)
        for (int c = 0; c < lat.dim; ++c)
            u1.at(i, c) += -params.nu * lat.ksq(i) * state.primary.at(i, c) + forcing.at(i, c);
    u1 += detail::buoyancy_term(state.companion, params.buoyancy_a);
    project_divergence_free(u1); // zero mode and rounding in the heat part

    SpectralField th1 = advective_contraction(state.primary, state.companion);
    th1 *= mi;
    for (std::size_t i = 0; i < m; ++i)
        th1.at(i, 0) += -params.mu_thermal * lat.ksq(i) * state.companion.at(i, 0);
    return {std::move(u1), std::move(th1)};
}

/// First Borel coefficients of the magnetic system:
///   v1 = -nu |k|^2 v0 - i k_j P_k[v0_j *^ v0 - (1/(mu rho)) B0_j *^ B0] + f
///   B1 = -(1/(mu sigma)) |k|^2 B0 - i k_j P_k[v0_j *^ B0 - B0_j *^ v0]
inline std::pair<SpectralField, SpectralField>
first_coeff_mhd(const FlowState& state, const SpectralField& forcing,
                const PhysicalParams& params) {
    state.check_consistent();
    if (state.problem != Problem::mhd)
        throw std::invalid_argument("first_coeff_mhd: state is not mhd");
    params.validate();
    constexpr double div_tol = 1e-10;
    state.primary.require_divergence_free(div_tol, "first_coeff_mhd(v0)");
    state.companion.require_divergence_free(div_tol, "first_coeff_mhd(B0)");
    forcing.require_divergence_free(div_tol, "first_coeff_mhd(f)");

    const ModeLattice& lat = state.primary.lattice;
    const std::size_t m = lat.size();
    const int d = lat.dim;
    const cplx mi{0.0, -1.0};
    const double lor = params.lorentz();
    const double eta = params.eta_mag();

    SpectralField v1 = advective_contraction(state.primary, state.primary);
    {
        SpectralField bb = advective_contraction(state.companion, state.companion);
        bb *= cplx{-lor, 0.0};
        v1 += bb;
    }
    project_divergence_free(v1);
    v1 *= mi;
    for (std::size_t i = 0; i < m; ++i)
        for (int c = 0; c < d; ++c)
            v1.at(i, c) += -params.nu * lat.ksq(i) * state.primary.at(i, c) + forcing.at(i, c);
    project_divergence_free(v1);

    SpectralField b1 = advective_contraction(state.primary, state.companion);
    {
        SpectralField bv = advective_contraction(state.companion, state.primary);
        bv *= cplx{-1.0, 0.0};
        b1 += bv;
    }
    project_divergence_free(b1);
    b1 *= mi;
    for (std::size_t i = 0; i < m; ++i)
        for (int c = 0; c < d; ++c)
            b1.at(i, c) += -eta * lat.ksq(i) * state.companion.at(i, c);
    project_divergence_free(b1);
    return {std::move(v1), std::move(b1)};
}

} // namespace borelflow

#endif
