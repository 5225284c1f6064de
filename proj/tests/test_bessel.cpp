// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "testutil.hpp"

using namespace borelflow;
using namespace borelflow::testutil;

namespace {

// Independent oracle: ascending series in 80-bit extended precision, usable
// for moderate arguments; kept free of the production code paths.
long double oracle_j1(long double z) {
    const long double q = z * z / 4.0L;
    long double term = z / 2.0L, sum = term;
    for (int m = 1; m < 80; ++m) {
        term *= -q / (static_cast<long double>(m) * (m + 1));
        sum += term;
    }
    return sum;
}

double fd_derivative(double (*f)(double), double z, double h) {
    // 5-point stencil
    return (-f(z + 2 * h) + 8 * f(z + h) - 8 * f(z - h) + f(z - 2 * h)) / (12.0 * h);
}

struct Ref {
    double z, j1, y1;
};

// high-precision reference values (40-digit ascending/asymptotic evaluation)
constexpr Ref kRefs[] = {
    {0.5, 0.24226845767487388638, -1.4714723926702430692},
    {1, 0.44005058574493351596, -0.78121282130028871655},
    {2, 0.5767248077568733872, -0.10703243154093754689},
    {5, -0.32757913759146522204, 0.1478631433912268448},
    {10, 0.04347274616886143667, 0.24901542420695388392},
    {13.9, 0.11652489036905633259, -0.1797509510695483425},
    {14.1, 0.14878435129739391404, -0.1519813334678176742},
    {30, -0.11875106261662293652, 0.084425570661747234891},
    {50, -0.097511828125175137661, -0.056795668562014767942},
    {100, -0.077145352014112158033, -0.020372312002759793305},
    {200, -0.054304538182378222711, 0.01530182458038998922},
};

} // namespace

TEST_CASE("J1 against frozen references and the series oracle") {
    CHECK(bessel_j1(0.0) == 0.0);
    for (const Ref& r : kRefs)
        CHECK(std::abs(bessel_j1(r.z) - r.j1) <= 1e-12 * std::abs(r.j1));
    for (double z = 0.05; z < 11.0; z += 0.173) {
        const double ref = static_cast<double>(oracle_j1(z));
        CHECK(std::abs(bessel_j1(z) - ref) <= 1e-11 * std::max(1e-3, std::abs(ref)));
    }
    CHECK_THROWS_AS(bessel_j1(-1.0), std::invalid_argument);
}

TEST_CASE("Y1 against frozen references; small-argument behavior") {
    for (const Ref& r : kRefs)
        CHECK(std::abs(bessel_y1(r.z) - r.y1) <= 1e-12 * std::abs(r.y1));
    // z Y1(z) -> -2/pi as z -> 0+; the gap closes like z^2 |log z|
    double prev = 1e9;
    for (double z : {1e-4, 1e-5, 1e-6, 1e-7}) {
        const double gap = std::abs(z * bessel_y1(z) + 2.0 / std::numbers::pi);
        CHECK(gap < prev / 10.0);
        prev = gap;
    }
    CHECK(prev < 1e-12);
    CHECK_THROWS_AS(bessel_y1(0.0), std::invalid_argument);
}

TEST_CASE("Wronskian J1 Y1' - J1' Y1 = 2/(pi z)") {
    SECTION("at z = 2 with tight tolerance") {
        const double z = 2.0;
        const double h = 1e-3;
        const double w = bessel_j1(z) * fd_derivative(bessel_y1, z, h) -
                         fd_derivative(bessel_j1, z, h) * bessel_y1(z);
        CHECK(std::abs(w - 2.0 / (std::numbers::pi * z)) < 1e-9);
    }
    SECTION("on 100 random points in [0.1, 50]") {
        Rng rng(2024);
        for (int i = 0; i < 100; ++i) {
            const double z = rng.unif(0.1, 50.0);
            const double h = 3e-4 * std::max(1.0, z / 10.0);
            const double w = bessel_j1(z) * fd_derivative(bessel_y1, z, h) -
                             fd_derivative(bessel_j1, z, h) * bessel_y1(z);
            CHECK(std::abs(w - 2.0 / (std::numbers::pi * z)) < 1e-9);
        }
    }
}

TEST_CASE("two_j1_over_z: removable singularity, bound, Laplace identity") {
    struct {
        double z, v;
    } refs[] = {{0, 1}, {1e-8, 0.9999999999999999875}, {0.3, 0.98879210848736005161},
                {1, 0.88010117148986703192}, {7, -0.0013379495663845236283},
                {14, 0.019053593528399036158}, {50, -0.0039004731250070055065}};
    for (const auto& r : refs)
        CHECK(std::abs(two_j1_over_z(r.z) - r.v) <= 1e-12 * std::max(1e-3, std::abs(r.v)));

    SECTION("|2 J1(z)/z| <= 1 on [0, 100]") {
        for (double z = 0.0; z <= 100.0; z += 0.01) CHECK(std::abs(two_j1_over_z(z)) <= 1.0);
    }
    SECTION("sup of |J1(z)/z| is 1/2, attained at z -> 0") {
        double sup = 0.0;
        for (double z = 0.0; z <= 100.0; z += 0.005)
            sup = std::max(sup, 0.5 * std::abs(two_j1_over_z(z)));
        CHECK(std::abs(sup - 0.5) < 1e-10);
    }
    SECTION("Laplace identity against the closed form") {
        // int_0^inf 2J1(2 sqrt(nu p)|k|)/z e^{-p/t} dp = (1 - e^{-nu|k|^2 t})/(nu|k|^2)
        for (auto [ks, t] : {std::pair{1.0, 0.1}, std::pair{4.0, 0.05}}) {
            const double closed = (1.0 - std::exp(-ks * t)) / ks;
            const double P = 40.0 * t; // tail bound < 1e-12 of the value
            const int n = 400000;
            double acc = 0.0;
            for (int i = 0; i <= n; ++i) {
                const double p = P * i / n;
                const double f = two_j1_over_z(2.0 * std::sqrt(ks * p)) * std::exp(-p / t);
                acc += (i == 0 || i == n) ? 0.5 * f : f;
            }
            acc *= P / n;
            CHECK(std::abs(acc - closed) < 1e-8);
        }
        // the spec'd spot value
        CHECK(std::abs((1.0 - std::exp(-0.1)) - 0.095162581964040427) < 1e-15);
    }
}

TEST_CASE("kernel G against frozen references and branch seams") {
    struct {
        double z, zp, g;
    } refs[] = {
        {2, 1, 0.40344512998831962877},
        {10, 3, 0.21094926459602711249},
        {0.8, 0.2, 0.2257280498905779574},
        {5, 4.999, 0.00063655600429766503675},
        {3, 1e-5, 0.21585163714310627487},
        {0.004, 0.002, 0.00095492903631215006126},
        {50, 20, -0.39870344124188001884},
        {200, 100, -0.22867736387295711383},
        {1.0, 0.999999, 6.3661945405758905604e-7},
    };
    for (const auto& r : refs)
        CHECK(std::abs(kernel_g(r.z, r.zp) - r.g) <= 1e-9 * std::max(1e-4, std::abs(r.g)));

    SECTION("diagonal zeros") {
        for (double z : {0.5, 2.0, 10.0}) CHECK(std::abs(kernel_g(z, z)) < 1e-14);
        CHECK(kernel_g(0.0, 0.0) == 0.0);
    }
    SECTION("z' > z rejected") { CHECK_THROWS_AS(kernel_g(1.0, 2.0), std::invalid_argument); }
    SECTION("small-argument limit (pi/z) G -> 1 - (z'/z)^2") {
        for (double ratio : {0.0, 0.3, 0.7, 0.95}) {
            for (double z : {1e-3, 1e-4, 1e-5}) {
                const double g = kernel_g(z, ratio * z);
                CHECK(std::abs(std::numbers::pi / z * g - (1.0 - ratio * ratio)) < 5e-3);
            }
        }
    }
    SECTION("branch agreement across the diagonal band seam") {
        // values straddling the expansion/direct switch differ by the exact
        // slope -dG/dz' = 2/pi times the step, to high relative accuracy
        for (double z : {0.1, 1.0, 25.0, 150.0}) {
            const double inside = kernel_g(z, z - 0.9e-5);
            const double outside = kernel_g(z, z - 1.1e-5);
            const double slope = (outside - inside) / 0.2e-5;
            CHECK(std::abs(slope - 2.0 / std::numbers::pi) < 1e-4);
        }
    }
    SECTION("scanned suprema sit in the expected bands") {
        const KernelTable& t = kernel_table();
        CHECK(t.sup_G >= 0.55);
        CHECK(t.sup_G <= 0.65);
        CHECK(t.sup_G_over_z > 0.0);
        CHECK(std::abs(t.sup_G_over_z - 1.0 / std::numbers::pi) < 1e-3);
    }
}

TEST_CASE("kernel H: frozen values, limits, ODE, boundary behavior") {
    struct {
        double p, pp, ksq, h;
    } refs[] = {
        {1, 0.3, 2, 0.52704038230802810788},
        {2, 1.5, 0.5, 0.24702225931757080642},
        {1, 0.25, 0, 0.75},
        {0.7, 0.699, 3, 0.0014285704074339959687},
        {1, 0.5, 1e-7, 0.49999999715735903286},
        {10, 2, 4, 0.066378316326549146818},
    };
    for (const auto& r : refs)
        CHECK(std::abs(kernel_h(r.p, r.pp, r.ksq) - r.h) <= 1e-9 * std::max(1e-4, std::abs(r.h)));
    // p' = 0 limit equals the inhomogeneous Bessel factor
    CHECK(std::abs(kernel_h(5.0, 0.0, 1.0) - two_j1_over_z(2.0 * std::sqrt(5.0))) < 1e-12);

    SECTION("diagonal zero and p = 0 rejection") {
        CHECK(kernel_h(1.0, 1.0, 2.0) == 0.0);
        CHECK_THROWS_AS(kernel_h(0.0, 0.0, 1.0), std::invalid_argument);
    }
    SECTION("ODE p H_pp + 2 H_p + ksq H = 0 at the spec'd point") {
        const double p = 1.0, pp = 0.3, ks = 2.0, h = 1e-4;
        const double hp = kernel_h(p + h, pp, ks), hm = kernel_h(p - h, pp, ks),
                     h0 = kernel_h(p, pp, ks);
        const double res = p * (hp - 2 * h0 + hm) / (h * h) + 2 * (hp - hm) / (2 * h) + ks * h0;
        CHECK(std::abs(res) / std::max(std::abs(h0), ks) < 1e-6);
    }
    SECTION("ODE residual on 50 random triples") {
        Rng rng(99);
        for (int i = 0; i < 50; ++i) {
            const double p = rng.unif(0.3, 5.0);
            const double pp = rng.unif(0.01, 0.75) * p;
            const double ks = rng.unif(0.05, 4.0);
            const double h = 1e-4 * std::max(1.0, p);
            const double hp = kernel_h(p + h, pp, ks), hm = kernel_h(p - h, pp, ks),
                         h0 = kernel_h(p, pp, ks);
            const double res =
                p * (hp - 2 * h0 + hm) / (h * h) + 2 * (hp - hm) / (2 * h) + ks * h0;
            CHECK(std::abs(res) / std::max(std::abs(h0), ks) < 1e-5);
        }
    }
    SECTION("H -> 0 and H_p -> 1/p as p' -> p-") {
        const double p = 1.7, ks = 2.3;
        double prev_gap = 1e9;
        for (double delta : {1e-2, 1e-3, 1e-4}) {
            const double pp = p - delta;
            CHECK(std::abs(kernel_h(p, pp, ks)) < 2.0 * delta / p + 1e-12);
            const double h = delta / 8.0;
            const double dH = (kernel_h(p + h, pp, ks) - kernel_h(p - h, pp, ks)) / (2 * h);
            const double gap = std::abs(dH - 1.0 / p);
            CHECK(gap < prev_gap);
            prev_gap = gap;
        }
    }
}
