#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qerlab/billiard.hpp"

using namespace qerlab;

TEST(Billiard, CircleClosedForm) {
    // unit circle: beta(y, eta) = (y + 2 arccos(eta), eta)
    const Domain d = Domain::disc(1.0);
    std::mt19937_64 rng(3);
    double worst = 0.0;
    for (int i = 0; i < 2000; ++i) {
        const auto p = uniform_phase_point(d, rng);
        const auto r = billiard_map(d, p);
        ASSERT_TRUE(r.regular());
        const BoundaryPhasePoint want{d.wrap(p.y + 2.0 * std::acos(p.eta)), p.eta};
        worst = std::max(worst, phase_distance(d, r.point, want));
    }
    EXPECT_LT(worst, 1e-9);
}

TEST(Billiard, CircleChordLength) {
    const Domain d = Domain::disc(2.0);
    const BoundaryPhasePoint p{0.3, 0.4};
    const auto r = billiard_map(d, p);
    EXPECT_NEAR(r.path_length, 2.0 * 2.0 * std::sqrt(1.0 - 0.4 * 0.4), 1e-10);
}

TEST(Billiard, TimeReversal) {
    // beta(R beta(x)) = R x with R the momentum flip
    const Domain st = Domain::stadium(1.0, 1.0);
    std::mt19937_64 rng(4);
    int checked = 0;
    for (int i = 0; i < 500; ++i) {
        const auto x = uniform_phase_point(st, rng);
        const auto a = billiard_map(st, x);
        if (!a.regular()) continue;
        const auto b = billiard_map(st, reverse(a.point));
        if (!b.regular()) continue;
        EXPECT_LT(phase_distance(st, b.point, reverse(x)), 1e-9);
        ++checked;
    }
    EXPECT_GT(checked, 400);
}

TEST(Billiard, InverseIterate) {
    const Domain st = Domain::stadium(1.0, 1.0);
    std::mt19937_64 rng(5);
    for (int i = 0; i < 100; ++i) {
        const auto x = uniform_phase_point(st, rng);
        const auto f = billiard_iterate(st, x, 3);
        if (!f.regular()) continue;
        const auto b = billiard_iterate(st, f.point, -3);
        if (!b.regular()) continue;
        EXPECT_LT(phase_distance(st, b.point, x), 1e-8);
    }
}

TEST(Billiard, CornerQueryIsReported) {
    const Domain sq = Domain::polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    const auto r = billiard_map(sq, {1.0, 0.2});
    EXPECT_EQ(r.status, MapStatus::corner);
    EXPECT_THROW(billiard_map(sq, {0.5, 1.0}), Error);
}

TEST(Billiard, BirkhoffAverageOfConstant) {
    const Domain d = Domain::disc(1.0);
    const auto res = birkhoff_average(d, [](const BoundaryPhasePoint&) { return 2.5; }, {0.1, 0.3}, 50);
    ASSERT_EQ(res.running.size(), 50u);
    EXPECT_NEAR(res.running.back(), 2.5, 1e-14);
}

TEST(Transmission, StadiumMidlineIsReflection) {
    const Domain st = Domain::stadium(1.0, 1.0);
    const auto mid = InteriorCurve::segment({0.0, -0.85}, {0.0, 0.85});
    std::mt19937_64 rng(6);
    int regular = 0;
    for (int i = 0; i < 3000 && regular < 200; ++i) {
        const auto x = uniform_phase_point(st, rng);
        for (const auto& r : transmission_map(st, mid, x)) {
            if (!r.regular()) continue;
            EXPECT_LT(phase_distance(st, r.point, reflect_left_right(st, x)), 1e-8);
            ++regular;
        }
    }
    EXPECT_GE(regular, 200);
}

TEST(Transmission, DiscDiameterIsMirror) {
    // H = horizontal diameter: transmission is the mirror y -> -y, eta -> -eta in arc length from (1, 0)
    const Domain d = Domain::disc(1.0);
    const auto H = InteriorCurve::segment({-0.9, 0.0}, {0.9, 0.0});
    std::mt19937_64 rng(7);
    int regular = 0;
    for (int i = 0; i < 2000; ++i) {
        const auto x = uniform_phase_point(d, rng);
        for (const auto& r : transmission_map(d, H, x)) {
            if (!r.regular()) continue;
            const BoundaryPhasePoint want{d.wrap(-x.y), -x.eta};
            EXPECT_LT(phase_distance(d, r.point, want), 1e-8);
            ++regular;
        }
    }
    EXPECT_GT(regular, 100);
}

TEST(Commutation, MidlineCommutesWithBilliardMap) {
    const Domain st = Domain::stadium(1.0, 1.0);
    const auto mid = InteriorCurve::segment({0.0, -0.85}, {0.0, 0.85});
    const auto est = commutation_fraction(st, mid, 1, 1, 1e-3, 4000, 8);
    EXPECT_GT(est.n_used, 50u);
    EXPECT_GT(est.fraction, 0.98);
}

TEST(Commutation, TiltedSegmentRarelyCommutes) {
    const Domain st = Domain::stadium(1.0, 1.0);
    const auto tilt = InteriorCurve::segment({-1.5, -0.45}, {1.3, 0.6});
    const auto est = commutation_fraction(st, tilt, 1, 1, 0.05, 4000, 9);
    EXPECT_LT(est.fraction, 0.2);
}
