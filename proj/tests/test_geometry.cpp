#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qerlab/geometry.hpp"
#include "qerlab/io.hpp"

using namespace qerlab;

namespace {

constexpr double PI = std::numbers::pi;

// area by Green's theorem on a fine polygonal sampling of the boundary
double sampled_area(const Domain& d, int n = 20000) {
    double a = 0.0;
    for (int i = 0; i < n; ++i) {
        const Vec2 p = d.point(d.perimeter() * i / n), q = d.point(d.perimeter() * (i + 1) / n);
        a += 0.5 * (p.x * q.y - p.y * q.x);
    }
    return a;
}

}  // namespace

TEST(Domain, DiscAreaPerimeter) {
    const Domain d = Domain::disc(1.7);
    EXPECT_NEAR(d.area(), PI * 1.7 * 1.7, 1e-10 * d.area());
    EXPECT_NEAR(d.perimeter(), 2 * PI * 1.7, 1e-10 * d.perimeter());
    EXPECT_NEAR(d.diameter(), 3.4, 1e-3);
}

TEST(Domain, StadiumAreaPerimeter) {
    const Domain d = Domain::stadium(1.0, 1.0);
    EXPECT_NEAR(d.area(), PI + 4.0, 1e-10 * d.area());
    EXPECT_NEAR(d.perimeter(), 2 * PI + 4.0, 1e-10 * d.perimeter());
    EXPECT_NEAR(sampled_area(d), d.area(), 1e-6);
}

TEST(Domain, StadiumCurvature) {
    const Domain d = Domain::stadium(1.0, 1.0);
    int flat = 0, round = 0;
    for (int i = 0; i < 200; ++i) {
        const double y = d.perimeter() * (i + 0.5) / 200;
        if (d.corner_distance(y) < 1e-3) continue;
        const Frame f = d.frame(y);
        if (std::abs(f.point.y) > 1.0 - 1e-12 && std::abs(f.point.x) < 1.0) {
            EXPECT_EQ(f.curvature, 0.0);
            ++flat;
        } else {
            EXPECT_NEAR(f.curvature, 1.0, 1e-12);
            ++round;
        }
    }
    EXPECT_GT(flat, 0);
    EXPECT_GT(round, 0);
}

TEST(Domain, PolygonMatchesShoelace) {
    const std::vector<Vec2> v{{0, 0}, {2, 0}, {2.5, 1.5}, {1, 2.2}, {-0.5, 1}};
    double a = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec2 p = v[i], q = v[(i + 1) % v.size()];
        a += 0.5 * (p.x * q.y - p.y * q.x);
    }
    const Domain d = Domain::polygon(v);
    EXPECT_NEAR(d.area(), a, 1e-12);
    EXPECT_TRUE(d.has_sharp_corners());
    EXPECT_EQ(d.corners().size(), v.size());
}

TEST(Domain, FrameIsOrthonormal) {
    const Domain d = Domain::cardioid(1.0);
    for (int i = 0; i < 50; ++i) {
        const double y = d.perimeter() * (i + 0.37) / 50;
        if (d.corner_distance(y) < 1e-2) continue;
        const Frame f = d.frame(y);
        EXPECT_NEAR(norm(f.tangent), 1.0, 1e-10);
        EXPECT_NEAR(norm(f.normal), 1.0, 1e-10);
        EXPECT_NEAR(dot(f.tangent, f.normal), 0.0, 1e-10);
    }
}

TEST(Domain, ContainsAndDistance) {
    const Domain d = Domain::disc(1.0);
    EXPECT_TRUE(d.contains({0.3, -0.2}));
    EXPECT_FALSE(d.contains({0.9, 0.9}));
    EXPECT_NEAR(d.distance_to_boundary({0.3, 0.4}), 0.5, 1e-8);
}

TEST(Domain, FirstHitOnDisc) {
    const Domain d = Domain::disc(1.0);
    const auto h = d.first_hit({0.0, 0.0}, {1.0, 0.0});
    EXPECT_NEAR(d.point(h.y).x, 1.0, 1e-12);
    EXPECT_NEAR(d.point(h.y).y, 0.0, 1e-12);
}

TEST(InteriorCurve, LengthsAndClearance) {
    const auto seg = InteriorCurve::segment({-1.5, -0.45}, {1.3, 0.6});
    EXPECT_NEAR(seg.length(), std::hypot(2.8, 1.05), 1e-12);
    EXPECT_FALSE(seg.closed());
    const auto c = InteriorCurve::circle({0.0, 0.0}, 0.5);
    EXPECT_NEAR(c.length(), PI, 1e-12);
    EXPECT_TRUE(c.closed());
    const Domain st = Domain::stadium(1.0, 1.0);
    EXPECT_NEAR(c.clearance(st), 0.5, 1e-3);
    EXPECT_GT(seg.clearance(st), 0.3);
}

TEST(InteriorCurve, ClearanceViolationThrows) {
    const Domain d = Domain::disc(1.0);
    const auto c = InteriorCurve::circle({0.0, 0.0}, 0.99);
    try {
        require_clearance(d, c, 0.05);
        FAIL() << "expected ClearanceViolation";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ClearanceViolation);
    }
}

TEST(InteriorCurve, SegmentIntersection) {
    const auto mid = InteriorCurve::segment({0.0, -0.85}, {0.0, 0.85});
    const auto hits = mid.intersections({-0.5, 0.1}, {1.0, 0.0}, 10.0);
    ASSERT_EQ(hits.size(), 1u);
    EXPECT_NEAR(mid.point(hits[0].s).y, 0.1, 1e-12);
}

TEST(DomainJson, BuiltinsAndErrors) {
    const Domain st = domain_from_json(json::parse(R"({"shape":"stadium","a":1.0,"r":1.0})"));
    EXPECT_NEAR(st.area(), PI + 4.0, 1e-10);
    const Domain sp = domain_from_json(json::parse(R"({"shape":"spline","points":[[1,0],[0,1],[-1,0],[0,-1]],"closed":true})"));
    EXPECT_GT(sp.area(), 1.5);
    EXPECT_THROW(domain_from_json(json::parse(R"({"shape":"stadium","a":1.0,"r":1.0,"extra":2})")), Error);
    EXPECT_THROW(domain_from_json(json::parse(R"({"shape":"blob"})")), Error);
}

TEST(CurveJson, SegmentAndCircle) {
    const auto s = curve_from_json(json::parse(R"({"shape":"segment","a":[0,-0.5],"b":[0,0.5],"normal_side":"left"})"));
    EXPECT_NEAR(s.length(), 1.0, 1e-14);
    const auto c = curve_from_json(json::parse(R"({"shape":"circle","r":0.25})"));
    EXPECT_NEAR(c.length(), 0.5 * PI, 1e-14);
}
