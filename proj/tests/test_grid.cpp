#include "waverate/grid.hpp"
#include "waverate/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace waverate;

TEST_CASE("kappa floors onto the grid") {
    CHECK(kappa(10, 0.37) == 0.3);
    CHECK(kappa(4, 1.0) == 1.0);
    CHECK(kappa(7, 0.999) == 6.0 / 7.0);
    CHECK(kappa(8, 0.0) == 0.0);
    CHECK_THROWS_AS(kappa(4, -0.1), DomainError);
    CHECK_THROWS_AS(kappa(4, 1.1), DomainError);

    // nodes map onto themselves exactly, including non-dyadic ones
    for (int n : {2, 3, 5, 7, 10, 16, 31}) {
        for (int k = 0; k <= n; ++k) {
            double node = static_cast<double>(k) / n;
            CHECK(kappa(n, node) == node);
        }
    }
}

TEST_CASE("polygonal interpolation reproduces affine functions and is idempotent") {
    auto affine = [](double x) { return 3.0 * x - 1.0; };
    PiecewiseLinearFn f = pi_n(6, affine);
    Rng rng(3, 0);
    for (int i = 0; i < 100; ++i) {
        double x = rng.uniform();
        CHECK(f(x) == Catch::Approx(affine(x)).margin(1e-14));
    }
    // idempotence: interpolating the interpolant changes nothing
    PiecewiseLinearFn g = pi_n(6, [&](double x) { return f(x); });
    for (int i = 0; i < 100; ++i) {
        double x = rng.uniform();
        CHECK(g(x) == Catch::Approx(f(x)).margin(1e-14));
    }
    // hand value: n=2, w(x)=x^2 interpolates w(0)=0, w(0.5)=0.25 on the first cell
    PiecewiseLinearFn q = pi_n(2, [](double x) { return x * x; });
    CHECK(q(0.25) == Catch::Approx(0.125).margin(1e-15));
    // node exactness
    NodalVector w(5);
    for (int k = 0; k <= 5; ++k) w[k] = std::sin(1.0 + k);
    PiecewiseLinearFn p = pi_n(w);
    for (int k = 0; k <= 5; ++k) CHECK(p(static_cast<double>(k) / 5) == w[k]);
}

TEST_CASE("discrete laplacian basics") {
    NodalVector zero(8);
    NodalVector lz = discrete_laplacian(zero);
    for (int k = 0; k <= 8; ++k) CHECK(lz[k] == 0.0);

    NodalVector bad(4);
    bad[0] = 1.0;
    CHECK_THROWS_AS(discrete_laplacian(bad), DomainError);

    // nodal mode 1 at n=4 is an eigenvector with factor sin^2(pi/8)/(pi/8)^2
    int n = 4;
    NodalVector phi = NodalVector::sample(n, [](double x) { return sine_basis(1, x); });
    phi[0] = phi[n] = 0.0;
    NodalVector lap = discrete_laplacian(phi);
    double c = std::pow(std::sin(kPi / 8.0) / (kPi / 8.0), 2.0);
    for (int k = 1; k < n; ++k)
        CHECK(lap[k] == Catch::Approx(-kPi * kPi * c * phi[k]).margin(1e-10));
}

TEST_CASE("eigenfactor values and bounds") {
    CHECK(eigenfactor(2, 1) == Catch::Approx(8.0 / (kPi * kPi)).margin(1e-15));
    for (int n = 2; n <= 64; ++n)
        for (int j = 1; j < n; ++j) {
            double c = eigenfactor(n, j);
            CHECK(c >= 4.0 / (kPi * kPi));
            CHECK(c <= 1.0);
        }
    for (int n : {100, 200, 1000}) CHECK(eigenfactor(n, 1) >= 1.0 - 1e-3);
    CHECK_THROWS_AS(eigenfactor(4, 0), DomainError);
    CHECK_THROWS_AS(eigenfactor(4, 4), DomainError);
}

TEST_CASE("eigenrelation holds to 1e-10 for n <= 64") {
    for (int n = 2; n <= 64; ++n) CHECK(eigenrelation_defect(n) <= 1e-10);
}

TEST_CASE("discrete orthonormality to 1e-12") {
    for (int n : {2, 4, 8, 16, 32, 64}) CHECK(orthonormality_defect(n) <= 1e-12);
}

TEST_CASE("summation by parts is machine-exact") {
    // u = v
    NodalVector u = NodalVector::sample(8, [](double x) { return x * (1.0 - x); });
    u[0] = u[8] = 0.0;
    CHECK(ibp_defect(u, u) == 0.0);

    Rng rng(17, 0);
    for (int n : {2, 4, 8, 16, 32}) {
        for (int trial = 0; trial < 100; ++trial) {
            NodalVector a(n), b(n);
            for (int k = 1; k < n; ++k) {
                a[k] = rng.uniform(-1.0, 1.0);
                b[k] = rng.uniform(-1.0, 1.0);
            }
            CHECK(ibp_defect(a, b) <= 1e-12);
        }
    }

    // the two lowest modes at n=16
    int n = 16;
    NodalVector p1 = NodalVector::sample(n, [](double x) { return sine_basis(1, x); });
    NodalVector p2 = NodalVector::sample(n, [](double x) { return sine_basis(2, x); });
    p1[0] = p1[n] = p2[0] = p2[n] = 0.0;
    CHECK(ibp_defect(p1, p2) <= 1e-12);
}

TEST_CASE("grid validates the stability bound") {
    CHECK_NOTHROW(SpaceTimeGrid(8, 64, 1.0));
    CHECK_THROWS_AS(SpaceTimeGrid(8, 4, 1.0), DomainError);
    CHECK_THROWS_AS(SpaceTimeGrid(1, 64, 1.0), DomainError);
    CHECK_THROWS_AS(SpaceTimeGrid(8, 64, -1.0), DomainError);
    SpaceTimeGrid g(8, 64, 1.0);
    CHECK(g.dt() == 1.0 / 64.0);
    CHECK(SpaceTimeGrid::default_steps(8, 1.0) == 32);
    CHECK(SpaceTimeGrid::default_steps(8, 1.0, 0.5, 4) == 64);
}
