// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "testutil.hpp"

using namespace borelflow;
using namespace borelflow::testutil;

namespace {

TimeTrajectory rk4_endpoint(Problem pb, const SpectralField& u0, const SpectralField& th0,
                            const SpectralField& f, const PhysicalParams& params, double t,
                            double dt_hint) {
    const long steps = std::max(1L, std::lround(t / dt_hint));
    return galerkin_rk4(pb, u0, th0, f, params, t, t / static_cast<double>(steps),
                        static_cast<int>(steps));
}

} // namespace

TEST_CASE("laplace reconstruction of the heat shear mode") {
    const ModeLattice lat = lat2(1.0, 1);
    PhysicalParams params;
    params.nu = 1.0;
    const SpectralField u0 = shear_mode(lat, IVec{0, 1, 0}, 0, 0.6);
    const SpectralField th0(lat, FieldKind::scalar);
    const SpectralField f(lat, FieldKind::vector);
    const BorelGrid grid = build_grid(40.0, 8192, 2.0);
    const BorelSolution sol = march_boussinesq(u0, th0, f, params, grid, 24, 1e-12);

    SECTION("matches u0 e^{-nu |k|^2 t} to 1e-8") {
        for (double t : {0.01, 0.1}) {
            const FlowState st = laplace_eval(sol, t, 1.9);
            for (std::size_t i = 0; i < lat.size(); ++i)
                for (int c = 0; c < 2; ++c) {
                    const cplx want = u0.at(i, c) * std::exp(-params.nu * lat.ksq(i) * t);
                    CHECK(std::abs(st.primary.at(i, c) - want) < 1e-8);
                }
            CHECK(st.companion.max_abs() == 0.0);
        }
    }
    SECTION("t -> 0 recovers the initial data") {
        const FlowState st = laplace_eval(sol, 1e-6, 1.9);
        for (std::size_t i = 0; i < lat.size(); ++i)
            for (int c = 0; c < 2; ++c)
                CHECK(std::abs(st.primary.at(i, c) - u0.at(i, c)) < 1e-5);
    }
    SECTION("validity gate 1/t > omega is hard") {
        CHECK_THROWS_AS(laplace_eval(sol, 1.0, 1.9), validity_error);
        CHECK_THROWS_AS(laplace_eval(sol, 0.0, 1.9), std::invalid_argument);
    }
}

TEST_CASE("RK4 oracle") {
    const ModeLattice lat = lat2(1.0, 2);
    PhysicalParams params;
    params.nu = 0.8;
    params.mu_thermal = 1.1;
    params.buoyancy_a = 0.7;
    const SpectralField f(lat, FieldKind::vector);

    SECTION("zero data stays zero") {
        const SpectralField z(lat, FieldKind::vector), zs(lat, FieldKind::scalar);
        const TimeTrajectory traj = galerkin_rk4(Problem::boussinesq, z, zs, f, params, 0.1, 1e-3);
        for (const auto& st : traj.primary) CHECK(st.max_abs() == 0.0);
    }
    SECTION("heat decay to 1e-10") {
        const SpectralField u0 = shear_mode(lat, IVec{0, 1, 0}, 0, 0.5);
        const SpectralField th0(lat, FieldKind::scalar);
        const TimeTrajectory traj =
            galerkin_rk4(Problem::boussinesq, u0, th0, f, params, 0.2, 1e-3);
        const double t = traj.times.back();
        for (std::size_t i = 0; i < lat.size(); ++i)
            for (int c = 0; c < 2; ++c) {
                const cplx want = u0.at(i, c) * std::exp(-params.nu * lat.ksq(i) * t);
                CHECK(std::abs(traj.primary.back().at(i, c) - want) < 1e-10);
            }
    }
    SECTION("fourth-order step-halving on a nonlinear two-mode example") {
        SpectralField u0 = shear_mode(lat, IVec{0, 1, 0}, 0, 0.4);
        {
            const SpectralField m2 = shear_mode(lat, IVec{1, 0, 0}, 1, 0.3);
            u0 += m2;
        }
        const SpectralField th0 = scalar_mode(lat, IVec{1, 1, 0}, 0.25);
        auto endpoint = [&](double dt) {
            const TimeTrajectory tr =
                galerkin_rk4(Problem::boussinesq, u0, th0, f, params, 0.25, dt, 1 << 20);
            return std::pair{tr.primary.back(), tr.companion.back()};
        };
        const auto [p1, c1] = endpoint(2e-3);
        const auto [p2, c2] = endpoint(1e-3);
        const auto [p3, c3] = endpoint(5e-4);
        const double e1 = std::max(max_diff(p1, p3), max_diff(c1, c3));
        const double e2 = std::max(max_diff(p2, p3), max_diff(c2, c3));
        // with e3 ~ 0: ratio (e1 - e2)/e2 ~ 2^4 - 1 modulo the Richardson bias
        const double ratio = e1 / e2;
        CHECK(ratio > 12.0);
        CHECK(ratio < 22.0);
    }
    SECTION("blow-up detection aborts once the norm passes 1e12") {
        // corner mode far beyond the explicit stability limit: the growing
        // iterates must trip the guard, not return garbage
        SpectralField u0(lat, FieldKind::vector);
        u0.at(IVec{2, 2, 0}, 0) = cplx{0.5, 0.0};
        u0.at(IVec{2, 2, 0}, 1) = cplx{-0.5, 0.0};
        u0.at(IVec{-2, -2, 0}, 0) = cplx{0.5, 0.0};
        u0.at(IVec{-2, -2, 0}, 1) = cplx{-0.5, 0.0};
        const SpectralField th0(lat, FieldKind::scalar);
        CHECK_THROWS_AS(galerkin_rk4(Problem::boussinesq, u0, th0, f, params, 40.0, 0.5),
                        numerical_error);
    }
}

TEST_CASE("physical-space evaluation") {
    const ModeLattice lat = lat2(1.0, 2);
    SECTION("single conjugate pair gives a cosine") {
        const double A = 0.8;
        const SpectralField u = shear_mode(lat, IVec{0, 1, 0}, 0, A);
        std::vector<KVec> pts;
        for (int i = 0; i < 7; ++i) pts.push_back(KVec{0.3 * i, 0.45 * i - 1.0, 0.0});
        const auto vals = physical_eval(u, pts);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            CHECK(vals[i][0] == Catch::Approx(A * std::cos(pts[i][1])).margin(1e-12));
            CHECK(std::abs(vals[i][1]) < 1e-12);
        }
    }
    SECTION("zero field") {
        const SpectralField z(lat, FieldKind::scalar);
        const auto vals = physical_eval(z, {KVec{0.1, 0.2, 0.0}});
        CHECK(vals[0][0] == 0.0);
    }
    SECTION("discrete Parseval identity") {
        Rng rng(77);
        const SpectralField fld = random_scalar(lat, rng);
        double power = 0.0;
        for (std::size_t i = 0; i < lat.size(); ++i) power += std::norm(fld.at(i, 0));
        // uniform grid with more points per axis than twice the cutoff
        const int n = 2 * lat.cutoff + 3;
        std::vector<KVec> pts;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                pts.push_back(KVec{2.0 * std::numbers::pi * i / n, 2.0 * std::numbers::pi * j / n, 0.0});
        const auto vals = physical_eval(fld, pts);
        double mean = 0.0;
        for (const auto& v : vals) mean += v[0] * v[0];
        mean /= static_cast<double>(pts.size());
        CHECK(mean == Catch::Approx(power).epsilon(1e-12));
    }
    SECTION("conjugate-symmetry violation is rejected") {
        SpectralField bad(lat, FieldKind::scalar);
        bad.at(IVec{1, 0, 0}, 0) = cplx{1.0, 0.5};
        bad.at(IVec{-1, 0, 0}, 0) = cplx{1.0, 0.5}; // should be the conjugate
        CHECK_THROWS_AS(physical_eval(bad, {KVec{0.0, 0.0, 0.0}}), std::invalid_argument);
    }
}

TEST_CASE("spectral defect of trajectories") {
    const ModeLattice lat = lat2(1.0, 2);
    PhysicalParams params;
    params.nu = 1.0;
    params.mu_thermal = 1.4;
    params.buoyancy_a = 0.6;
    const SpectralField f(lat, FieldKind::vector);

    SECTION("heat trajectory, dt = 1e-3") {
        const SpectralField u0 = shear_mode(lat, IVec{0, 1, 0}, 0, 0.5);
        const SpectralField th0(lat, FieldKind::scalar);
        const TimeTrajectory traj =
            galerkin_rk4(Problem::boussinesq, u0, th0, f, params, 0.05, 1e-3);
        CHECK(pde_residual(traj, f, params) < 1e-5);
    }
    SECTION("nonlinear trajectory, dt = 1e-3") {
        SpectralField u0 = shear_mode(lat, IVec{0, 1, 0}, 0, 0.4);
        {
            const SpectralField m2 = shear_mode(lat, IVec{1, 0, 0}, 1, 0.3);
            u0 += m2;
        }
        const SpectralField th0 = scalar_mode(lat, IVec{1, 1, 0}, 0.3);
        const TimeTrajectory traj =
            galerkin_rk4(Problem::boussinesq, u0, th0, f, params, 0.05, 1e-3);
        CHECK(pde_residual(traj, f, params) < 1e-4);
    }
    SECTION("forced equilibrium is stationary to 1e-10") {
        const SpectralField u0 = shear_mode(lat, IVec{0, 1, 0}, 0, 0.5);
        const SpectralField th0(lat, FieldKind::scalar);
        SpectralField fs = u0;
        for (std::size_t i = 0; i < lat.size(); ++i)
            for (int c = 0; c < 2; ++c) fs.at(i, c) *= params.nu * lat.ksq(i);
        const TimeTrajectory traj =
            galerkin_rk4(Problem::boussinesq, u0, th0, fs, params, 0.05, 1e-3);
        CHECK(pde_residual(traj, fs, params) < 1e-10);
    }
    SECTION("fewer than three samples is rejected") {
        TimeTrajectory traj;
        traj.times = {0.0, 0.1};
        CHECK_THROWS_AS(pde_residual(traj, f, params), std::invalid_argument);
    }
}

TEST_CASE("oracle agreement: laplace vs RK4 on random data within the ball") {
    const ModeLattice lat = lat2(1.0, 2);
    PhysicalParams params;
    params.nu = 1.0;
    params.mu_thermal = 1.5;
    params.buoyancy_a = 0.4;
    Rng rng(8128);
    SpectralField u0 = random_divfree(lat, rng);
    SpectralField th0 = random_scalar(lat, rng);
    const NormParams ball_np{NormKind::l1_linf, 3.0, 0.0, 2};
    // normalize the pair into a small ball so the a-priori machinery is tame
    {
        const double s = 0.2 / field_norm(u0, th0, ball_np);
        u0 *= cplx{s, 0.0};
        th0 *= cplx{s, 0.0};
    }
    const SpectralField f(lat, FieldKind::vector);
    const NormParams np{NormKind::l1_linf, 3.0, 0.0, 2};

    FlowState st(Problem::boussinesq, lat);
    st.primary = u0;
    st.companion = th0;
    const auto fc = first_coeff_boussinesq(st, f, params);
    const ConstantsBundle cb = lemma24_constants(params, np, kernel_table());
    const GrowthEstimate ge = apriori_growth(Problem::boussinesq, field_norm(u0, th0, np),
                                             field_norm(fc.first, fc.second, np), cb);
    const double tmax = 0.5 / ge.omega;
    const BorelGrid grid = build_grid(38.0 * tmax, 1024, 1.0);
    const BorelSolution sol = march_boussinesq(u0, th0, f, params, grid, 20, 1e-12);

    // analytic-strip proxy: the reconstructed states keep a finite
    // gamma-beta norm bounded by twice the data-scale ball
    const NormParams strip{NormKind::gamma_beta, 3.0, 0.3, 2};
    const double ball = field_norm(u0, th0, strip);

    double worst = 0.0;
    for (int i = 1; i <= 5; ++i) {
        const double t = tmax * i / 5.0;
        const FlowState lp = laplace_eval(sol, t, ge.omega);
        const TimeTrajectory rk = rk4_endpoint(Problem::boussinesq, u0, th0, f, params, t, 1e-3);
        SpectralField dp = lp.primary, dc = lp.companion;
        borelflow::detail::axpy(dp, rk.primary.back(), cplx{-1.0, 0.0});
        borelflow::detail::axpy(dc, rk.companion.back(), cplx{-1.0, 0.0});
        const double ref = field_norm(rk.primary.back(), rk.companion.back(), np);
        worst = std::max(worst, field_norm(dp, dc, np) / ref);

        CHECK(lp.primary.divergence_defect() < 1e-10);
        CHECK(lp.primary.conj_symmetry_defect() < 1e-11 * std::max(1.0, lp.primary.max_abs()));
        CHECK(field_norm(lp.primary, lp.companion, strip) <= 2.0 * ball);
    }
    CHECK(worst < 1e-6);
}
