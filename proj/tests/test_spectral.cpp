// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "testutil.hpp"

using namespace borelflow;
using namespace borelflow::testutil;

TEST_CASE("lattice indexing round-trips and negation closure") {
    const ModeLattice lat(0.5, 3, 2);
    REQUIRE(lat.size() == 49);
    for (std::size_t i = 0; i < lat.size(); ++i) {
        REQUIRE(lat.index(lat.multi(i)) == i);
        const IVec n = lat.multi(i);
        IVec neg{-n[0], -n[1], -n[2]};
        REQUIRE(lat.contains(neg));
        REQUIRE(lat.negated_index(i) == lat.index(neg));
    }
    const ModeLattice lat3(1.0, 2, 3);
    REQUIRE(lat3.size() == 125);
    REQUIRE(lat3.index(lat3.multi(77)) == 77);
}

TEST_CASE("hodge projection on the worked examples") {
    const KVec k10{1.0, 0.0, 0.0};
    auto r = hodge_project(k10, {cplx{1, 0}, cplx{0, 0}, cplx{0, 0}}, 2);
    CHECK(std::abs(r[0]) < 1e-14); // parallel component annihilated
    CHECK(std::abs(r[1]) < 1e-14);

    r = hodge_project(k10, {cplx{0, 0}, cplx{1, 0}, cplx{0, 0}}, 2);
    CHECK(std::abs(r[0]) < 1e-14);
    CHECK(std::abs(r[1] - cplx{1, 0}) < 1e-14); // orthogonal component fixed

    const KVec k11{1.0, 1.0, 0.0};
    r = hodge_project(k11, {cplx{1, 0}, cplx{0, 0}, cplx{0, 0}}, 2);
    CHECK(std::abs(r[0] - cplx{0.5, 0}) < 1e-14);
    CHECK(std::abs(r[1] - cplx{-0.5, 0}) < 1e-14);

    CHECK_THROWS_AS(hodge_project(KVec{0, 0, 0}, {cplx{1, 0}, cplx{0, 0}, cplx{0, 0}}, 2),
                    std::invalid_argument);
}

TEST_CASE("hodge projection is idempotent and annihilates divergence") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        KVec k{rng.unif(-3, 3), rng.unif(-3, 3), 0.0};
        if (k[0] * k[0] + k[1] * k[1] < 1e-6) continue;
        std::array<cplx, 3> v{rng.c(), rng.c(), cplx{0, 0}};
        const auto p1 = hodge_project(k, v, 2);
        const auto p2 = hodge_project(k, p1, 2);
        double vmag = 0.0;
        cplx dot{0, 0};
        for (int c = 0; c < 2; ++c) {
            vmag += std::abs(v[c]);
            dot += k[c] * p1[c];
            CHECK(std::abs(p1[c] - p2[c]) <= 1e-14 * (1.0 + std::abs(p1[c])));
        }
        CHECK(std::abs(dot) <= 1e-14 * vmag);
    }
}

TEST_CASE("convolution: single modes, zero field, commutativity, bilinearity") {
    const ModeLattice lat = lat2(1.0, 3);
    SECTION("single mode pair multiplies amplitudes at the sum index") {
        SpectralField f(lat, FieldKind::scalar), g(lat, FieldKind::scalar);
        f.at(IVec{1, 0, 0}, 0) = cplx{2.0, 1.0};
        g.at(IVec{0, 2, 0}, 0) = cplx{-1.0, 3.0};
        const SpectralField fg = convolve(f, g);
        for (std::size_t i = 0; i < lat.size(); ++i) {
            const IVec n = lat.multi(i);
            if (n[0] == 1 && n[1] == 2)
                CHECK(std::abs(fg.at(i, 0) - cplx{2.0, 1.0} * cplx{-1.0, 3.0}) < 1e-14);
            else
                CHECK(std::abs(fg.at(i, 0)) == 0.0);
        }
    }
    SECTION("products outside the lattice are discarded") {
        SpectralField f(lat, FieldKind::scalar), g(lat, FieldKind::scalar);
        f.at(IVec{3, 0, 0}, 0) = cplx{1.0, 0.0};
        g.at(IVec{3, 0, 0}, 0) = cplx{1.0, 0.0};
        const SpectralField fg = convolve(f, g);
        CHECK(fg.max_abs() == 0.0);
    }
    SECTION("zero input gives zero output") {
        Rng rng(3);
        const SpectralField f = random_scalar(lat, rng);
        const SpectralField z(lat, FieldKind::scalar);
        CHECK(convolve(f, z).max_abs() == 0.0);
    }
    SECTION("matches the brute-force oracle; commutative; conjugate-symmetric") {
        Rng rng(5);
        for (int trial = 0; trial < 10; ++trial) {
            const SpectralField f = random_scalar(lat, rng);
            const SpectralField g = random_scalar(lat, rng);
            const SpectralField fg = convolve(f, g);
            CHECK(max_diff(fg, convolve_oracle(f, g)) < 1e-13);
            CHECK(max_diff(fg, convolve(g, f)) < 1e-13);
            CHECK(fg.conj_symmetry_defect() <= 1e-14 * std::max(1.0, fg.max_abs()));
        }
    }
    SECTION("bilinearity in a complex scalar") {
        Rng rng(7);
        const SpectralField f = random_scalar(lat, rng);
        const SpectralField g = random_scalar(lat, rng);
        const cplx alpha{0.7, -1.3};
        SpectralField af = f;
        af *= alpha;
        SpectralField lhs = convolve(af, g);
        SpectralField rhs = convolve(f, g);
        rhs *= alpha;
        CHECK(max_diff(lhs, rhs) < 1e-13);
    }
    SECTION("lattice mismatch is rejected") {
        SpectralField f(lat, FieldKind::scalar);
        SpectralField g(lat2(1.0, 2), FieldKind::scalar);
        CHECK_THROWS_AS(convolve(f, g), std::invalid_argument);
    }
}

TEST_CASE("parallel convolution path matches the serial one") {
    const ModeLattice lat(1.0, 20, 2); // above the parallel-path threshold
    Rng rng(91);
    const SpectralField f = random_scalar(lat, rng);
    const SpectralField g = random_scalar(lat, rng);
    const SpectralField serial = convolve(f, g);
    convolution_workers().store(4);
    const SpectralField parallel = convolve(f, g);
    convolution_workers().store(1);
    CHECK(max_diff(serial, parallel) == 0.0);

    const ModeLattice lat3(1.0, 8, 3);
    const SpectralField f3 = random_scalar(lat3, rng);
    const SpectralField g3 = random_scalar(lat3, rng);
    const SpectralField s3 = convolve(f3, g3);
    convolution_workers().store(3);
    const SpectralField p3 = convolve(f3, g3);
    convolution_workers().store(1);
    CHECK(max_diff(s3, p3) == 0.0);
}

TEST_CASE("3-d convolution matches the oracle") {
    const ModeLattice lat(1.0, 1, 3);
    Rng rng(17);
    const SpectralField f = random_scalar(lat, rng);
    const SpectralField g = random_scalar(lat, rng);
    CHECK(max_diff(convolve(f, g), convolve_oracle(f, g)) < 1e-13);
}

TEST_CASE("first Boussinesq coefficients") {
    const ModeLattice lat = lat2(1.0, 2);
    PhysicalParams params;
    params.nu = 0.7;
    params.mu_thermal = 1.3;
    params.buoyancy_a = 0.9;
    const SpectralField zf(lat, FieldKind::vector);

    SECTION("zero data gives zero coefficients") {
        FlowState st(Problem::boussinesq, lat);
        const auto [u1, t1] = first_coeff_boussinesq(st, zf, params);
        CHECK(u1.max_abs() == 0.0);
        CHECK(t1.max_abs() == 0.0);
    }
    SECTION("shear mode reduces to heat decay") {
        FlowState st(Problem::boussinesq, lat);
        st.primary = shear_mode(lat, IVec{0, 1, 0}, 0, 0.8);
        const auto [u1, t1] = first_coeff_boussinesq(st, zf, params);
        CHECK(t1.max_abs() == 0.0);
        for (std::size_t i = 0; i < lat.size(); ++i)
            for (int c = 0; c < 2; ++c)
                CHECK(std::abs(u1.at(i, c) + params.nu * lat.ksq(i) * st.primary.at(i, c)) < 1e-14);
    }
    SECTION("pure temperature mode: buoyancy and heat terms") {
        FlowState st(Problem::boussinesq, lat);
        st.companion = scalar_mode(lat, IVec{1, 1, 0}, 0.6);
        const auto [u1, t1] = first_coeff_boussinesq(st, zf, params);
        for (std::size_t i = 0; i < lat.size(); ++i) {
            const double ks = lat.ksq(i);
            if (st.companion.at(i, 0) != cplx{0, 0}) {
                const KVec k = lat.wavevector(i);
                auto want = hodge_project(
                    k, {cplx{0, 0}, params.buoyancy_a * st.companion.at(i, 0), cplx{0, 0}}, 2);
                for (int c = 0; c < 2; ++c) CHECK(std::abs(u1.at(i, c) - want[c]) < 1e-14);
                CHECK(std::abs(t1.at(i, 0) + params.mu_thermal * ks * st.companion.at(i, 0)) < 1e-14);
            } else {
                for (int c = 0; c < 2; ++c) CHECK(std::abs(u1.at(i, c)) < 1e-14);
            }
        }
        CHECK(u1.divergence_defect() < 1e-12);
    }
    SECTION("non-divergence-free input is rejected") {
        FlowState st(Problem::boussinesq, lat);
        st.primary.at(IVec{1, 0, 0}, 0) = cplx{1.0, 0.0}; // parallel to k
        st.primary.at(IVec{-1, 0, 0}, 0) = cplx{1.0, 0.0};
        CHECK_THROWS_AS(first_coeff_boussinesq(st, zf, params), std::invalid_argument);
    }
    SECTION("outputs stay divergence-free and conjugate-symmetric on random data") {
        Rng rng(23);
        FlowState st(Problem::boussinesq, lat);
        st.primary = random_divfree(lat, rng, 0.3);
        st.companion = random_scalar(lat, rng, 0.3);
        const SpectralField f = random_divfree(lat, rng, 0.1);
        const auto [u1, t1] = first_coeff_boussinesq(st, f, params);
        CHECK(u1.divergence_defect() < 1e-12);
        CHECK(u1.conj_symmetry_defect() < 1e-13 * std::max(1.0, u1.max_abs()));
        CHECK(t1.conj_symmetry_defect() < 1e-13 * std::max(1.0, t1.max_abs()));
    }
}

TEST_CASE("first magnetic coefficients") {
    const ModeLattice lat = lat2(1.0, 2);
    PhysicalParams params;
    params.nu = 0.5;
    params.mu_mag = 2.0;
    params.sigma = 0.25;
    params.rho = 4.0;
    const SpectralField zf(lat, FieldKind::vector);
    const double eta = 1.0 / (params.mu_mag * params.sigma);

    SECTION("zero data") {
        FlowState st(Problem::mhd, lat);
        const auto [v1, b1] = first_coeff_mhd(st, zf, params);
        CHECK(v1.max_abs() == 0.0);
        CHECK(b1.max_abs() == 0.0);
    }
    SECTION("velocity shear mode decays") {
        FlowState st(Problem::mhd, lat);
        st.primary = shear_mode(lat, IVec{0, 1, 0}, 0, 0.4);
        const auto [v1, b1] = first_coeff_mhd(st, zf, params);
        CHECK(b1.max_abs() == 0.0);
        for (std::size_t i = 0; i < lat.size(); ++i)
            for (int c = 0; c < 2; ++c)
                CHECK(std::abs(v1.at(i, c) + params.nu * lat.ksq(i) * st.primary.at(i, c)) < 1e-14);
    }
    SECTION("magnetic shear mode: self-term cancels, induction decays") {
        FlowState st(Problem::mhd, lat);
        st.companion = shear_mode(lat, IVec{1, 0, 0}, 1, 0.4);
        const auto [v1, b1] = first_coeff_mhd(st, zf, params);
        CHECK(v1.max_abs() < 1e-15);
        for (std::size_t i = 0; i < lat.size(); ++i)
            for (int c = 0; c < 2; ++c)
                CHECK(std::abs(b1.at(i, c) + eta * lat.ksq(i) * st.companion.at(i, c)) < 1e-14);
    }
    SECTION("divergence-free invariants on random data") {
        Rng rng(29);
        FlowState st(Problem::mhd, lat);
        st.primary = random_divfree(lat, rng, 0.3);
        st.companion = random_divfree(lat, rng, 0.3);
        const auto [v1, b1] = first_coeff_mhd(st, zf, params);
        CHECK(v1.divergence_defect() < 1e-12);
        CHECK(b1.divergence_defect() < 1e-12);
    }
}
