#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "qerlab/eigenmode.hpp"
#include "qerlab/semiclassics.hpp"
#include "qerlab/spectrum.hpp"

using namespace qerlab;

namespace {

struct Zero {
    double x;
    int m;
};

// zeros of J_m (or J_m') on (0.5, xmax) with multiplicity 2 for m > 0, from std::cyl_bessel_j
std::vector<Zero> bessel_zeros(bool derivative, double xmax) {
    std::vector<Zero> out;
    for (int m = 0; m < 40; ++m) {
        auto f = [&](double x) {
            if (!derivative) return std::cyl_bessel_j(m, x);
            return m == 0 ? -std::cyl_bessel_j(1, x) : 0.5 * (std::cyl_bessel_j(m - 1, x) - std::cyl_bessel_j(m + 1, x));
        };
        double x0 = 0.5, f0 = f(x0);
        for (double x1 = x0 + 1e-3; x1 < xmax; x1 += 1e-3) {
            const double f1 = f(x1);
            if ((f0 < 0) != (f1 < 0)) {
                double lo = x0, hi = x1;
                for (int i = 0; i < 60; ++i) {
                    const double mid = 0.5 * (lo + hi);
                    ((f(mid) < 0) == (f(lo) < 0) ? lo : hi) = mid;
                }
                for (int c = 0; c < (m ? 2 : 1); ++c) out.push_back({0.5 * (lo + hi), m});
            }
            x0 = x1;
            f0 = f1;
        }
    }
    std::sort(out.begin(), out.end(), [](auto a, auto b) { return a.x < b.x; });
    return out;
}

int m_of(const std::vector<Zero>& z, double lambda) {
    for (const auto& e : z)
        if (std::abs(e.x - lambda) < 1e-6) return e.m;
    return -1;
}

}  // namespace

TEST(Spectrum, DiscDirichletLevels) {
    ScanOptions opt;
    opt.fixed_nodes = 160;
    const auto rep = spectrum_scan(Domain::disc(1.0), BoundaryCondition::dirichlet, 2.0, 7.0, opt);
    const auto ref = bessel_zeros(false, 7.0);
    ASSERT_EQ(rep.modes.size(), ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(rep.modes[i].lambda, ref[i].x, 1e-6) << i;
}

TEST(Spectrum, DiscNeumannLevels) {
    ScanOptions opt;
    opt.fixed_nodes = 160;
    const auto rep = spectrum_scan(Domain::disc(1.0), BoundaryCondition::neumann, 0.5, 5.5, opt);
    const auto ref = bessel_zeros(true, 5.5);
    ASSERT_EQ(rep.modes.size(), ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(rep.modes[i].lambda, ref[i].x, 1e-6) << i;
}

TEST(Spectrum, DiscOfRadiusTwoScalesLevels) {
    ScanOptions opt;
    opt.fixed_nodes = 160;
    const auto rep = spectrum_scan(Domain::disc(2.0), BoundaryCondition::dirichlet, 1.0, 2.5, opt);
    const auto ref = bessel_zeros(false, 5.0);
    ASSERT_EQ(rep.modes.size(), ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(rep.modes[i].lambda, 0.5 * ref[i].x, 1e-6);
}

TEST(Spectrum, EmptyBelowGroundState) {
    const auto rep = spectrum_scan(Domain::disc(1.0), BoundaryCondition::dirichlet, 0.0, 2.0);
    EXPECT_TRUE(rep.modes.empty());
}

TEST(Spectrum, WeylCount) {
    const Domain d = Domain::disc(1.0);
    const double lam = 10.0;
    EXPECT_NEAR(weyl_count(d, BoundaryCondition::dirichlet, lam), d.area() * lam * lam / (4 * M_PI) - d.perimeter() * lam / (4 * M_PI),
                1e-12);
    EXPECT_NEAR(weyl_count(d, BoundaryCondition::neumann, lam), d.area() * lam * lam / (4 * M_PI) + d.perimeter() * lam / (4 * M_PI),
                1e-12);
}

TEST(Modes, NeumannBoundaryNormsMatchBessel) {
    // interior-normalized disc Neumann mode: ||u^b||^2 = 2 lambda^2 / (lambda^2 - m^2)
    const Domain d = Domain::disc(1.0);
    ScanOptions opt;
    opt.fixed_nodes = 160;
    const auto rep = spectrum_scan(d, BoundaryCondition::neumann, 3.0, 6.0, opt);
    const auto ref = bessel_zeros(true, 6.5);
    ASSERT_FALSE(rep.modes.empty());
    for (const auto& raw : rep.modes) {
        const int m = m_of(ref, raw.lambda);
        ASSERT_GE(m, 0);
        const EigenMode mode = normalize_mode(d, raw);
        EXPECT_NEAR(mode.normalization_discrepancy, 0.0, 0.01);
        const double b = boundary_matrix_element(ModeField(d, mode), [](double) { return 1.0; });
        const double exact = 2.0 * raw.lambda * raw.lambda / (raw.lambda * raw.lambda - m * m);
        EXPECT_NEAR(b / exact, 1.0, 1e-3) << raw.lambda;
    }
}

TEST(Modes, InteriorFieldMatchesBesselProfile) {
    // radial Dirichlet ground state: phi(r) proportional to J_0(j_01 r)
    const Domain d = Domain::disc(1.0);
    ScanOptions opt;
    opt.fixed_nodes = 128;
    const auto rep = spectrum_scan(d, BoundaryCondition::dirichlet, 2.0, 3.0, opt);
    ASSERT_EQ(rep.modes.size(), 1u);
    const ModeField f(d, rep.modes[0]);
    const double lam = rep.modes[0].lambda;
    const cplx c0 = f.raw({0.0, 0.0}, false).value;
    for (double r : {0.2, 0.5, 0.8}) {
        const cplx v = f.raw({r * std::cos(1.0), r * std::sin(1.0)}, false).value;
        EXPECT_NEAR(std::abs(v / c0 - std::cyl_bessel_j(0, lam * r)), 0.0, 1e-6) << r;
    }
}

TEST(Modes, OddStadiumModeVanishesOnMidline) {
    const Domain st = Domain::stadium(1.0, 1.0);
    ScanOptions opt;
    opt.points_per_wavelength = 10.0;
    const auto rep = spectrum_scan(st, BoundaryCondition::neumann, 5.0, 6.5, opt);
    const auto mid = InteriorCurve::segment({0.0, -0.7}, {0.0, 0.7});
    const auto g = curve_grid_for(mid, 6.5);
    int odd = 0, even = 0;
    for (const auto& m : rep.modes) {
        const auto mode = normalize_mode(st, m, NormalizeOptions{.rellich_only = true});
        const auto r = restrict_cauchy_data(ModeField(st, mode), mid, g);
        double mx = 0.0;
        for (const auto& v : r.value) mx = std::max(mx, std::abs(v));
        if (mx < 1e-6) ++odd;
        else ++even;
    }
    EXPECT_GT(odd, 0);
    EXPECT_GT(even, 0);
}
