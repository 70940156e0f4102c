#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include "qerlab/fourier.hpp"
#include "qerlab/green.hpp"
#include "qerlab/numerics.hpp"
#include "qerlab/special.hpp"

using namespace qerlab;

TEST(Hankel, AgreesWithStdBessel) {
    for (double x : {0.05, 0.7, 3.0, 6.5, 17.3, 120.0}) {
        for (int n : {0, 1, 2, 5}) {
            const cplx h = special::hankel1(n, x);
            EXPECT_NEAR(h.real(), std::cyl_bessel_j(n, x), 1e-12 * std::max(1.0, std::abs(h))) << n << " " << x;
            EXPECT_NEAR(h.imag(), std::cyl_neumann(n, x), 1e-11 * std::max(1.0, std::abs(h))) << n << " " << x;
        }
    }
}

TEST(Hankel, FastPathRelativeError) {
    double worst = 0.0;
    for (int i = 0; i < 4000; ++i) {
        const double x = 0.01 + 400.0 * i / 4000.0;
        const auto f = special::fast_hankel01(x);
        const cplx h0{std::cyl_bessel_j(0, x), std::cyl_neumann(0, x)};
        const cplx h1{std::cyl_bessel_j(1, x), std::cyl_neumann(1, x)};
        worst = std::max({worst, std::abs(f.h0 - h0) / std::abs(h0), std::abs(f.h1 - h1) / std::abs(h1)});
    }
    EXPECT_LT(worst, 1e-11);
}

TEST(Hankel, Wronskian) {
    // J_1 Y_0 - J_0 Y_1 = 2 / (pi x)
    for (double x : {0.3, 2.0, 9.0, 55.0, 300.0}) {
        const auto h = special::fast_hankel01(x);
        const double w = h.h1.real() * h.h0.imag() - h.h0.real() * h.h1.imag();
        EXPECT_NEAR(w * M_PI * x / 2.0, 1.0, 1e-11);
    }
}

TEST(Bessel, DerivativeMatchesFiniteDifference) {
    for (int n : {0, 1, 3, 7})
        for (double x : {0.8, 4.4, 12.0}) {
            const double h = 1e-5;
            const double fd = (std::cyl_bessel_j(n, x + h) - std::cyl_bessel_j(n, x - h)) / (2 * h);
            EXPECT_NEAR(special::bessel_jn_prime(n, x), fd, 1e-9);
        }
}

TEST(Green, FreeSpaceKernel) {
    // G(x, x') = (i/4) H_0(lambda |x - x'|)
    const Vec2 x{0.3, -0.2}, xp{-0.4, 0.5};
    const double lam = 7.5, r = distance(x, xp);
    const auto g = green0(x, xp, lam);
    const cplx ref = cplx{0.0, 0.25} * cplx{std::cyl_bessel_j(0, lam * r), std::cyl_neumann(0, lam * r)};
    EXPECT_NEAR(std::abs(g.value - ref), 0.0, 1e-12);
    // gradient against a central difference
    const double h = 1e-6;
    const cplx dx = (green0({x.x + h, x.y}, xp, lam).value - green0({x.x - h, x.y}, xp, lam).value) / (2 * h);
    EXPECT_NEAR(std::abs(g.grad_x[0] - dx), 0.0, 1e-7);
    EXPECT_THROW(green0(x, x, lam), Error);
}

TEST(Fourier, RoundTripAndDerivative) {
    const int n = 64;
    std::vector<cplx> f(n);
    for (int j = 0; j < n; ++j) f[j] = std::sin(3.0 * 2 * M_PI * j / n) + cplx{0.0, std::cos(2 * M_PI * j / n)};
    const auto back = fft_inverse(fft_forward(f));
    for (int j = 0; j < n; ++j) EXPECT_NEAR(std::abs(back[j] - f[j]), 0.0, 1e-13);
    // on a period of 2 pi: d/dx sin(3x) = 3 cos(3x), d/dx i cos(x) = -i sin(x)
    const auto d = periodic_derivative(f);
    for (int j = 0; j < n; ++j) {
        const double x = 2 * M_PI * j / n;
        const cplx want = 3.0 * std::cos(3.0 * x) + cplx{0.0, -std::sin(x)};
        EXPECT_NEAR(std::abs(d[j] - want), 0.0, 1e-11);
    }
}

TEST(Quadrature, GaussLegendreExactForPolynomials) {
    const auto rule = gauss_legendre(12);
    for (int k = 0; k <= 23; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * std::pow(rule.nodes[i], k);
        const double exact = k % 2 ? 0.0 : 2.0 / (k + 1);
        EXPECT_NEAR(s, exact, 1e-14) << k;
    }
}

TEST(Numerics, LogLogSlopeOfPowerLaw) {
    std::vector<double> x{0.2, 0.1, 0.05, 0.025}, y;
    for (double v : x) y.push_back(3.0 * std::pow(v, 1.7));
    EXPECT_NEAR(loglog_slope(x, y), 1.7, 1e-12);
}

TEST(Numerics, SampleSeedsAreDistinctAndDeterministic) {
    EXPECT_EQ(sample_seed(5, 10), sample_seed(5, 10));
    EXPECT_NE(sample_seed(5, 10), sample_seed(5, 11));
    EXPECT_NE(sample_seed(5, 10), sample_seed(6, 10));
}
