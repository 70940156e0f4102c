#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qerlab/diagnostics.hpp"
#include "qerlab/semiclassics.hpp"
#include "qerlab/spectrum.hpp"

using namespace qerlab;

namespace {

std::vector<cplx> trig_samples(const CurveGrid& g, int k) {
    std::vector<cplx> f;
    for (double s : g.s) f.push_back(std::exp(cplx{0.0, 2.0 * M_PI * k * s / g.length}));
    return f;
}

}  // namespace

TEST(Quantize, IdentityAndMultiplication) {
    const auto C = InteriorCurve::circle({0.0, 0.0}, 0.5);
    const auto g = curve_grid_for(C, 30.0);
    std::vector<cplx> f = trig_samples(g, 3);
    for (std::size_t j = 0; j < f.size(); ++j) f[j] += 0.5 * trig_samples(g, -7)[j];
    const auto id = quantize(Symbol::one(), 30.0, f, g);
    for (std::size_t j = 0; j < f.size(); ++j) EXPECT_NEAR(std::abs(id[j] - f[j]), 0.0, 1e-12);
    const auto a = Symbol::of_s("cos", [&](double s) { return std::cos(2.0 * M_PI * s / g.length); });
    const auto af = quantize(a, 30.0, f, g);
    for (std::size_t j = 0; j < f.size(); ++j) EXPECT_NEAR(std::abs(af[j] - a(g.s[j], 0.0) * f[j]), 0.0, 1e-12);
}

TEST(Quantize, TauActsAsScaledFrequency) {
    // Op(tau) e^{i xi s} = (xi / lambda) e^{i xi s} for |xi / lambda| well inside 1
    const auto C = InteriorCurve::circle({0.0, 0.0}, 0.5);
    const double lam = 40.0;
    const auto g = curve_grid_for(C, lam);
    const int k = 8;
    const double tau = 2.0 * M_PI * k / g.length / lam;
    ASSERT_LT(tau, 0.8);
    const auto f = trig_samples(g, k);
    const auto out = quantize(Symbol::tau(), lam, f, g);
    for (std::size_t j = 0; j < f.size(); ++j) EXPECT_NEAR(std::abs(out[j] - tau * f[j]), 0.0, 1e-12);
}

TEST(Quantize, RejectsOpenAndUnderResolvedGrids) {
    const auto seg = InteriorCurve::segment({0.0, 0.0}, {1.0, 0.0});
    const auto gs = make_curve_grid(seg, 101);
    EXPECT_THROW(quantize(Symbol::one(), 10.0, std::vector<cplx>(gs.size()), gs), Error);
    const auto C = InteriorCurve::circle({0.0, 0.0}, 0.5);
    const auto gc = make_curve_grid(C, 16);
    try {
        quantize(Symbol::one(), 100.0, std::vector<cplx>(16), gc);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::UnderResolved);
    }
}

TEST(Quantize, DiagnosticSuiteExact) {
    for (const auto& c : diag::quantization_exactness()) EXPECT_TRUE(c.pass) << c.name << " " << c.value;
}

TEST(MatrixElement, OneGivesL2Norm) {
    const auto C = InteriorCurve::circle({0.0, 0.0}, 0.5);
    const auto g = curve_grid_for(C, 20.0);
    const auto f = trig_samples(g, 2);
    EXPECT_NEAR(matrix_element(f, g, 20.0, Symbol::one()).real(), g.length, 1e-12);
}

TEST(Limits, BoundaryLimitOnDisc) {
    // a = 1 on the boundary of a Neumann domain: 2 P / A
    const Domain d = Domain::disc(1.0);
    EXPECT_NEAR(predicted_boundary_limit(d, [](double, double) { return 1.0; }, BoundaryCondition::neumann), 4.0, 1e-8);
    const Domain st = Domain::stadium(1.0, 1.0);
    EXPECT_NEAR(predicted_boundary_limit(st, [](double, double) { return 1.0; }, BoundaryCondition::neumann),
                2.0 * st.perimeter() / st.area(), 1e-8);
}

TEST(Limits, LocalWeylOnSegment) {
    // a = 1, Dirichlet data: (1 / pi A) int_H int_{-pi/2}^{pi/2} d theta ds = L / A
    const Domain st = Domain::stadium(1.0, 1.0);
    const auto mid = InteriorCurve::segment({0.0, -0.85}, {0.0, 0.85});
    const auto lw = predicted_limit(st, mid, Symbol::one(), BoundaryCondition::neumann, DataKind::dirichlet_data, 0, 0,
                                    LimitConvention::local_weyl);
    EXPECT_NEAR(lw.value, 1.7 / st.area(), 1e-10);
    // Neumann data weights by 1 - sin^2 theta: half of the theta integral
    const auto ln = predicted_limit(st, mid, Symbol::one(), BoundaryCondition::neumann, DataKind::neumann_data, 0, 0,
                                    LimitConvention::local_weyl);
    EXPECT_NEAR(ln.value, 0.5 * 1.7 / st.area(), 1e-10);
}

TEST(Limits, MonteCarloMatchesQuadrature) {
    const Domain st = Domain::stadium(1.0, 1.0);
    const auto tilt = InteriorCurve::segment({-1.5, -0.45}, {1.3, 0.6});
    const auto mc = predicted_limit(st, tilt, Symbol::one(), BoundaryCondition::neumann, DataKind::dirichlet_data, 40000, 3);
    double err = 0.0;
    const double q = predicted_limit_quadrature(st, tilt, Symbol::one(), BoundaryCondition::neumann, DataKind::dirichlet_data, 128, &err);
    EXPECT_LT(std::abs(mc.value - q), 4.0 * std::hypot(mc.stderr_, err)) << mc.value << " " << q;
}

TEST(Statistics, TwoMeansSeparatesClusters) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> lo(0.0, 1e-5), hi(0.8, 0.1);
    std::vector<double> v;
    for (int i = 0; i < 60; ++i) v.push_back(std::abs(lo(rng)));
    for (int i = 0; i < 40; ++i) v.push_back(hi(rng));
    const auto b = two_means(v);
    EXPECT_NEAR(b.low_fraction, 0.6, 1e-12);
    EXPECT_LT(b.low_mean, 1e-4);
    EXPECT_NEAR(b.high_mean, 0.8, 0.05);
    EXPECT_GT(b.statistic, 5.0);
}

TEST(Statistics, CesaroAndMean) {
    const std::vector<double> v{1.0, 3.0, 5.0, 7.0};
    EXPECT_DOUBLE_EQ(mean_of(v), 4.0);
    EXPECT_DOUBLE_EQ(mean_of(v, 2), 6.0);
    EXPECT_DOUBLE_EQ(cesaro_variance(v, 4.0), (9.0 + 1.0 + 1.0 + 9.0) / 4.0);
    EXPECT_TRUE(std::isnan(mean_of(v, 4)));
}

TEST(Nodal, DiscModeOnConcentricCircle) {
    // a Dirichlet mode with angular number m has 2m sign changes on a circle where J_m(lambda r) != 0
    const Domain d = Domain::disc(1.0);
    ScanOptions opt;
    opt.fixed_nodes = 128;
    const auto rep = spectrum_scan(d, BoundaryCondition::dirichlet, 3.5, 5.5, opt);
    // j_{1,1} = 3.8317 (m = 1, twice), j_{2,1} = 5.1356 (m = 2, twice)
    ASSERT_EQ(rep.modes.size(), 4u);
    const auto C = InteriorCurve::circle({0.0, 0.0}, 0.5);
    for (const auto& m : rep.modes) {
        const int want = m.lambda < 4.5 ? 2 : 4;
        EXPECT_EQ(nodal_intersections(ModeField(d, m), C).count, want) << m.lambda;
    }
}

TEST(Nodal, CountIgnoresGlobalPhase) {
    const Domain d = Domain::disc(1.0);
    ScanOptions opt;
    opt.fixed_nodes = 128;
    const auto rep = spectrum_scan(d, BoundaryCondition::dirichlet, 4.5, 5.5, opt);
    ASSERT_FALSE(rep.modes.empty());
    const auto C = InteriorCurve::circle({0.0, 0.0}, 0.5);
    EigenMode m = rep.modes.front();
    const auto base = nodal_intersections(ModeField(d, m), C);
    for (auto& t : m.trace) t *= std::polar(1.0, 1.1);
    const auto turned = nodal_intersections(ModeField(d, m), C);
    EXPECT_EQ(turned.count, base.count);
    EXPECT_EQ(turned.count, 4);
    EXPECT_LT(turned.imag_residue, 1e-6);
}
