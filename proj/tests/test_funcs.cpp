#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cfnn/funcs.hpp"
#include "oracles.hpp"

using namespace cfnn;

TEST_CASE("elementary targets: hand values") {
    double x1[1] = {0.0};
    CHECK(eval_target(TargetId::Runge, std::span<const double>(x1, 1)) == 1.0);
    x1[0] = 0.2;
    CHECK(eval_target(TargetId::Runge, std::span<const double>(x1, 1)) ==
          doctest::Approx(0.5));

    double x3[3] = {1.0, 1.0, 1.0};
    CHECK(eval_target(TargetId::NestedRational, std::span<const double>(x3, 3)) ==
          doctest::Approx(1.5));

    double bad[1] = {3.0};
    CHECK_THROWS_AS(eval_target(TargetId::Runge, std::span<const double>(bad, 1)),
                    DomainError);
    double wrong[2] = {0.0, 0.0};
    CHECK_THROWS_AS(eval_target(TargetId::Runge, std::span<const double>(wrong, 2)),
                    DomainError);
}

TEST_CASE("jacobi sn: degenerate moduli and oddness") {
    for (double m : {0.0, 0.3, 0.7, 1.0}) CHECK(jacobi_sn(0.0, m) == 0.0);
    for (double u : {-3.0, -0.5, 0.7, 4.2}) {
        CHECK(jacobi_sn(u, 0.0) == doctest::Approx(std::sin(u)).epsilon(1e-12));
        CHECK(jacobi_sn(u, 1.0) == doctest::Approx(std::tanh(u)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(jacobi_sn(1.0, 1.5), DomainError);
}

TEST_CASE("jacobi sn: pythagorean identity over the (u, m) grid") {
    for (int i = 0; i < 100; ++i) {
        double u = -5.0 + 10.0 * i / 99.0;
        for (int j = 0; j < 10; ++j) {
            double m = j / 9.0;
            JacobiSnCn v = jacobi_sn_cn(u, m);
            CHECK(v.sn * v.sn + v.cn * v.cn == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("jacobi sn agrees with the ODE oracle") {
    Rng rng(101);
    double worst = 0.0;
    for (int t = 0; t < 60; ++t) {
        double u = rng.uniform(-5.0, 5.0);
        double m = rng.uniform(0.0, 1.0);
        worst = std::max(worst, std::fabs(jacobi_sn(u, m) -
                                          oracle::jacobi_sn_ode(u, m)));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("elliptic integrals: degenerate cases") {
    for (double phi : {0.0, 0.4, 1.2, 3.0, 6.0}) {
        CHECK(ellip_F(phi, 0.0) == doctest::Approx(phi).epsilon(1e-10));
        CHECK(ellip_E(phi, 0.0) == doctest::Approx(phi).epsilon(1e-10));
    }
    for (double m : {0.0, 0.5, 0.9}) {
        CHECK(ellip_F(0.0, m) == 0.0);
        CHECK(ellip_E(0.0, m) == 0.0);
    }
    CHECK_THROWS_AS(ellip_F(1.0, 1.0), DomainError);
    CHECK_THROWS_AS(ellip_F(-0.1, 0.5), DomainError);
}

TEST_CASE("complete integral against the AGM oracle") {
    for (double m : {0.1, 0.5, 0.9, 0.99}) {
        CHECK(ellip_F(0.5 * M_PI, m) ==
              doctest::Approx(oracle::complete_K_agm(m)).epsilon(1e-10));
    }
}

TEST_CASE("elliptic integrals agree with doubled composite quadrature") {
    Rng rng(55);
    for (int t = 0; t < 40; ++t) {
        double phi = rng.uniform(0.0, 2.0 * M_PI);
        double m = rng.uniform(0.0, 0.99);
        CHECK(std::fabs(ellip_F(phi, m) - oracle::ellip_F_simpson(phi, m)) < 1e-8);
        CHECK(std::fabs(ellip_E(phi, m) - oracle::ellip_E_simpson(phi, m)) < 1e-8);
    }
}

TEST_CASE("integrand ordering: E <= F on (0, pi/2]") {
    Rng rng(77);
    for (int t = 0; t < 200; ++t) {
        double phi = rng.uniform(1e-3, 0.5 * M_PI);
        double m = rng.uniform(0.01, 0.99);
        CHECK(ellip_E(phi, m) <= ellip_F(phi, m) + 1e-12);
    }
}

TEST_CASE("bessel I: boundary values and integral-representation oracle") {
    CHECK(bessel_I(0.0, 0.0) == 1.0);
    CHECK(bessel_I(1.0, 0.0) == 0.0);
    CHECK(bessel_I(3.7, 0.0) == 0.0);
    CHECK_THROWS_AS(bessel_I(-1.0, 1.0), DomainError);

    CHECK(bessel_I(0.0, 1.0) ==
          doctest::Approx(oracle::bessel_I_integral(0.0, 1.0)).epsilon(1e-10));

    Rng rng(88);
    for (int t = 0; t < 30; ++t) {
        double nu = rng.uniform(0.0, 5.0);
        double y = rng.uniform(0.01, 5.0);
        CHECK(std::fabs(bessel_I(nu, y) - oracle::bessel_I_integral(nu, y)) < 1e-8);
    }
}

TEST_CASE("adaptive quadrature basics") {
    double val = adaptive_quadrature([](double t) { return std::sin(t); }, 0.0,
                                     M_PI, 1e-12);
    CHECK(val == doctest::Approx(2.0).epsilon(1e-11));
    CHECK(adaptive_quadrature([](double t) { return t; }, 1.0, 1.0, 1e-12) == 0.0);
}

TEST_CASE("gauss-legendre rule sanity") {
    const GaussLegendreRule& r = gauss_legendre(12);
    double wsum = 0.0;
    for (double w : r.weights) wsum += w;
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-13));
    // odd polynomial integrates to zero
    double s = 0.0;
    for (size_t i = 0; i < r.nodes.size(); ++i)
        s += r.weights[i] * r.nodes[i] * r.nodes[i] * r.nodes[i];
    CHECK(s == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("registry lookups") {
    CHECK(get_target("runge").arity == 1);
    CHECK(get_target(TargetId::Ratio3).name == "ratio3");
    CHECK(all_targets().size() == 12);
    CHECK_THROWS_AS(get_target("nope"), InvalidConfig);
}
