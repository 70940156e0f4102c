#pragma once

// Planar billiard tables and interior curves.
//
// A Domain is a closed, counterclockwise chain of arc-length parameterized
// arcs. Boundary positions are addressed by a global arc-length coordinate
// y in [0, perimeter). The inward normal is the +90 degree rotation of the
// unit tangent. Junctions between arcs form the singular set; differential
// queries there raise CornerQuery.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qerlab/errors.hpp"
#include "qerlab/numerics.hpp"

namespace qerlab {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
constexpr Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
/// Counterclockwise quarter turn.
constexpr Vec2 perp(Vec2 a) { return {-a.y, a.x}; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline Vec2 normalized(Vec2 a) { return a / norm(a); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

/// Point with its orthonormal moving frame and signed curvature (positive
/// where the boundary bends toward the inward normal).
struct Frame {
    Vec2 point;
    Vec2 tangent;
    Vec2 normal;
    double curvature = 0.0;
};

struct RayArcHit {
    double t;  // ray parameter
    double s;  // arc-length on the arc
};

// ---------------------------------------------------------------------------
// Arcs

class Arc {
public:
    virtual ~Arc() = default;

    virtual double length() const = 0;
    virtual Vec2 point(double s) const = 0;
    virtual Vec2 tangent(double s) const = 0;
    virtual double curvature(double s) const = 0;

    Frame frame(double s) const {
        const Vec2 t = tangent(s);
        return {point(s), t, perp(t), curvature(s)};
    }

    /// All intersections of the ray x + t d with t in (t_min, t_max),
    /// appended to `out`.
    virtual void intersect_ray(Vec2 x, Vec2 d, double t_min, double t_max,
                               std::vector<RayArcHit>& out) const {
        generic_intersect(x, d, t_min, t_max, out);
    }

    /// Distance from x to the arc and the arc-length of the closest point.
    virtual std::pair<double, double> closest(Vec2 x) const {
        const int n = grid_cells();
        double best = std::numeric_limits<double>::infinity();
        int best_i = 0;
        const double L = length();
        for (int i = 0; i <= n; ++i) {
            const double d = distance(point(L * i / n), x);
            if (d < best) {
                best = d;
                best_i = i;
            }
        }
        // golden refinement around the best sample
        double a = L * std::max(0, best_i - 1) / n, b = L * std::min(n, best_i + 1) / n;
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double c = b - g * (b - a), e = a + g * (b - a);
        double fc = distance(point(c), x), fe = distance(point(e), x);
        for (int it = 0; it < 80; ++it) {
            if (fc < fe) {
                b = e; e = c; fe = fc; c = b - g * (b - a); fc = distance(point(c), x);
            } else {
                a = c; c = e; fc = fe; e = a + g * (b - a); fe = distance(point(e), x);
            }
        }
        if (best <= std::min(fc, fe)) return {best, L * best_i / n};
        return fc < fe ? std::pair{fc, c} : std::pair{fe, e};
    }

    double distance_to(Vec2 x) const { return closest(x).first; }

    /// Bound on total turning, used to size the bracketing grid.
    virtual double total_turning() const = 0;

protected:
    /// Uniform cells with at most 0.05 rad of turning each.
    int grid_cells() const {
        return std::max(16, static_cast<int>(std::ceil(total_turning() / 0.05)));
    }

    void generic_intersect(Vec2 x, Vec2 d, double t_min, double t_max,
                           std::vector<RayArcHit>& out) const {
        const int n = grid_cells();
        const double L = length();
        auto f = [&](double s) { return cross(d, point(s) - x); };
        auto df = [&](double s) { return cross(d, tangent(s)); };
        double s0 = 0.0, f0 = f(0.0);
        auto accept = [&](double s) {
            const double t = dot(point(s) - x, d);
            if (t > t_min && t < t_max) {
                for (const auto& h : out)
                    if (std::abs(h.t - t) < 1e-13 * std::max(1.0, t) && std::abs(h.s - s) < 1e-12) return;
                out.push_back({t, s});
            }
        };
        if (f0 == 0.0) accept(0.0);
        for (int i = 1; i <= n; ++i) {
            const double s1 = L * i / n;
            const double f1 = f(s1);
            if (f1 == 0.0) {
                accept(s1);
            } else if ((f0 < 0.0) != (f1 < 0.0) && f0 != 0.0) {
                accept(safeguarded_newton(f, df, s0, s1, 1e-16));
            }
            s0 = s1;
            f0 = f1;
        }
    }
};

class LineArc final : public Arc {
public:
    LineArc(Vec2 a, Vec2 b) : a_(a), b_(b), len_(distance(a, b)), t_((b - a) / distance(a, b)) {}

    double length() const override { return len_; }
    Vec2 point(double s) const override { return a_ + s * t_; }
    Vec2 tangent(double) const override { return t_; }
    double curvature(double) const override { return 0.0; }
    double total_turning() const override { return 0.0; }
    Vec2 start() const { return a_; }
    Vec2 end() const { return b_; }

    void intersect_ray(Vec2 x, Vec2 d, double t_min, double t_max,
                       std::vector<RayArcHit>& out) const override {
        const double den = cross(d, t_);
        if (den == 0.0) return;
        const Vec2 w = a_ - x;
        const double t = cross(w, t_) / den;
        const double s = cross(w, d) / den;
        const double slack = 1e-13 * len_;
        if (s < -slack || s > len_ + slack) return;
        if (t > t_min && t < t_max) out.push_back({t, std::clamp(s, 0.0, len_)});
    }

    std::pair<double, double> closest(Vec2 x) const override {
        const double s = std::clamp(dot(x - a_, t_), 0.0, len_);
        return {distance(point(s), x), s};
    }

private:
    Vec2 a_, b_;
    double len_;
    Vec2 t_;
};

/// Circular arc of radius r about c, starting at polar angle theta0 and
/// sweeping `sweep` radians (positive = counterclockwise).
class CircleArc final : public Arc {
public:
    CircleArc(Vec2 c, double r, double theta0, double sweep)
        : c_(c), r_(r), th0_(theta0), sweep_(sweep), sgn_(sweep >= 0 ? 1.0 : -1.0) {}

    double length() const override { return r_ * std::abs(sweep_); }
    Vec2 point(double s) const override {
        const double th = angle(s);
        return {c_.x + r_ * std::cos(th), c_.y + r_ * std::sin(th)};
    }
    Vec2 tangent(double s) const override {
        const double th = angle(s);
        return {-sgn_ * std::sin(th), sgn_ * std::cos(th)};
    }
    double curvature(double) const override { return sgn_ / r_; }
    double total_turning() const override { return std::abs(sweep_); }
    bool full_circle() const { return std::abs(std::abs(sweep_) - two_pi) < 1e-14; }

    void intersect_ray(Vec2 x, Vec2 d, double t_min, double t_max,
                       std::vector<RayArcHit>& out) const override {
        const Vec2 w = x - c_;
        const double b = dot(w, d);
        const double cc = dot(w, w) - r_ * r_;
        const double disc = b * b - cc;
        if (disc < 0.0) return;
        const double sq = std::sqrt(disc);
        // numerically stable pair of roots
        const double q = (b >= 0.0) ? -(b + sq) : -(b - sq);
        std::array<double, 2> ts{q, (q != 0.0) ? cc / q : -b};
        std::sort(ts.begin(), ts.end());
        const double L = length();
        for (int k = 0; k < (disc == 0.0 ? 1 : 2); ++k) {
            const double t = ts[static_cast<std::size_t>(k)];
            if (!(t > t_min && t < t_max)) continue;
            const Vec2 p = x + t * d;
            double u = sgn_ * (std::atan2(p.y - c_.y, p.x - c_.x) - th0_);
            u = std::fmod(u, two_pi);
            if (u < 0.0) u += two_pi;
            double s = u * r_;
            if (full_circle()) {
                if (s >= L) s -= L;
            } else {
                const double slack = 1e-12 * r_;
                if (s > L + slack) {
                    if (two_pi * r_ - s <= slack) s = 0.0;  // wrapped start point
                    else continue;
                }
                s = std::min(s, L);
            }
            out.push_back({t, s});
        }
    }

    std::pair<double, double> closest(Vec2 x) const override {
        const Vec2 w = x - c_;
        const double rho = norm(w);
        double u = sgn_ * (std::atan2(w.y, w.x) - th0_);
        u = std::fmod(u, two_pi);
        if (u < 0.0) u += two_pi;
        if (u <= std::abs(sweep_)) return {std::abs(rho - r_), std::min(r_ * u, length())};
        const double d0 = distance(point(0.0), x), d1 = distance(point(length()), x);
        return d0 <= d1 ? std::pair{d0, 0.0} : std::pair{d1, length()};
    }

private:
    double angle(double s) const { return th0_ + sgn_ * s / r_; }

    Vec2 c_;
    double r_, th0_, sweep_, sgn_;
};

/// Curve given by a smooth parameterization p(u), u in [u0, u1], reparameterized
/// by arc length through a Gauss-Legendre table refined until it converges to
/// 1e-12 relative.
class ParametricArc final : public Arc {
public:
    using Map = std::function<Vec2(double)>;

    ParametricArc(Map p, Map dp, Map ddp, double u0, double u1)
        : p_(std::move(p)), dp_(std::move(dp)), ddp_(std::move(ddp)), u0_(u0), u1_(u1) {
        int panels = 64;
        std::vector<double> prev;
        for (int level = 0; level < 12; ++level) {
            build_table(panels);
            const double total = cum_.back();
            if (!prev.empty() && std::abs(prev.back() - total) < 1e-12 * total) break;
            prev = cum_;
            panels *= 2;
        }
        double turning = 0.0;
        const int n = 4096;
        for (int i = 0; i < n; ++i) {
            const double s = length() * (i + 0.5) / n;
            turning += std::abs(curvature(s)) * length() / n;
        }
        turning_ = turning;
    }

    double length() const override { return cum_.back(); }
    Vec2 point(double s) const override { return p_(param(s)); }
    Vec2 tangent(double s) const override { return normalized(dp_(param(s))); }
    double curvature(double s) const override {
        const double u = param(s);
        const Vec2 d1 = dp_(u), d2 = ddp_(u);
        const double sp = norm(d1);
        if (sp == 0.0) return 0.0;
        return cross(d1, d2) / (sp * sp * sp);
    }
    double total_turning() const override { return turning_; }

    double speed(double u) const { return norm(dp_(u)); }

    /// Arc length from u0 to u.
    double arclength(double u) const {
        const std::size_t k = panel_of_param(u);
        return cum_[k] + integrate_gl16([this](double v) { return speed(v); }, knots_[k], u);
    }

    /// Parameter u at arc length s.
    double param(double s) const {
        s = std::clamp(s, 0.0, length());
        auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
        std::size_t k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - cum_.begin()) - 1));
        k = std::min(k, knots_.size() - 2);
        const double a = knots_[k], b = knots_[k + 1];
        auto f = [&](double u) {
            return cum_[k] + integrate_gl16([this](double v) { return speed(v); }, a, u) - s;
        };
        auto df = [&](double u) { return speed(u); };
        const double fa = f(a), fb = f(b);
        if (fa >= 0.0) return a;
        if (fb <= 0.0) return b;
        return safeguarded_newton(f, df, a, b, 1e-15);
    }

private:
    void build_table(int panels) {
        knots_.resize(static_cast<std::size_t>(panels) + 1);
        cum_.assign(static_cast<std::size_t>(panels) + 1, 0.0);
        for (int i = 0; i <= panels; ++i) knots_[static_cast<std::size_t>(i)] = u0_ + (u1_ - u0_) * i / panels;
        for (int i = 0; i < panels; ++i) {
            const auto k = static_cast<std::size_t>(i);
            cum_[k + 1] = cum_[k] + integrate_gl16([this](double v) { return speed(v); }, knots_[k], knots_[k + 1]);
        }
    }

    std::size_t panel_of_param(double u) const {
        auto it = std::upper_bound(knots_.begin(), knots_.end(), u);
        std::size_t k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - knots_.begin()) - 1));
        return std::min(k, knots_.size() - 2);
    }

    Map p_, dp_, ddp_;
    double u0_, u1_;
    std::vector<double> knots_, cum_;
    double turning_ = 0.0;
};

// ---------------------------------------------------------------------------
// Cubic splines through points (chord-length parameter)

class CubicSpline2 {
public:
    CubicSpline2(const std::vector<Vec2>& pts, bool closed) : closed_(closed) {
        if (pts.size() < (closed ? 3u : 2u)) fail(ErrorKind::InvalidArgument, "spline needs more points");
        std::vector<Vec2> p = pts;
        if (closed && distance(p.front(), p.back()) < 1e-14) p.pop_back();
        const std::size_t n = p.size();
        const std::size_t segs = closed ? n : n - 1;
        knots_.assign(segs + 1, 0.0);
        for (std::size_t i = 0; i < segs; ++i) knots_[i + 1] = knots_[i] + distance(p[i], p[(i + 1) % n]);
        std::vector<double> xs(segs + 1), ys(segs + 1);
        for (std::size_t i = 0; i <= segs; ++i) {
            xs[i] = p[i % n].x;
            ys[i] = p[i % n].y;
        }
        mx_ = second_derivatives(xs);
        my_ = second_derivatives(ys);
        xs_ = std::move(xs);
        ys_ = std::move(ys);
    }

    double u_max() const { return knots_.back(); }
    Vec2 eval(double u, int deriv) const {
        const std::size_t k = segment(u);
        return {eval1(xs_, mx_, k, u, deriv), eval1(ys_, my_, k, u, deriv)};
    }

private:
    std::vector<double> second_derivatives(const std::vector<double>& v) const {
        const std::size_t segs = knots_.size() - 1;
        const std::size_t m = closed_ ? segs : segs + 1;
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
        auto h = [&](std::size_t i) { return knots_[i + 1] - knots_[i]; };
        for (std::size_t i = 0; i < m; ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            if (!closed_ && (i == 0 || i == m - 1)) {
                A(ii, ii) = 1.0;  // natural end conditions
                continue;
            }
            const std::size_t im = closed_ ? (i + segs - 1) % segs : i - 1;
            const std::size_t ip = closed_ ? (i + 1) % segs : i + 1;
            const double h0 = h(im), h1 = h(closed_ ? i : i);
            const double vm = v[im], v0 = v[i], vp = closed_ ? v[i + 1] : v[ip];
            A(ii, static_cast<Eigen::Index>(im)) += h0 / 6.0;
            A(ii, ii) += (h0 + h1) / 3.0;
            A(ii, static_cast<Eigen::Index>(ip)) += h1 / 6.0;
            rhs(ii) = (vp - v0) / h1 - (v0 - vm) / h0;
        }
        Eigen::VectorXd sol = A.partialPivLu().solve(rhs);
        std::vector<double> out(segs + 1);
        for (std::size_t i = 0; i <= segs; ++i) out[i] = sol(static_cast<Eigen::Index>(closed_ ? i % segs : i));
        return out;
    }

    std::size_t segment(double u) const {
        auto it = std::upper_bound(knots_.begin(), knots_.end(), u);
        std::size_t k = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - knots_.begin()) - 1));
        return std::min(k, knots_.size() - 2);
    }

    double eval1(const std::vector<double>& v, const std::vector<double>& m, std::size_t k, double u, int deriv) const {
        const double h = knots_[k + 1] - knots_[k];
        const double a = (knots_[k + 1] - u) / h, b = (u - knots_[k]) / h;
        switch (deriv) {
            case 0:
                return a * v[k] + b * v[k + 1] + ((a * a * a - a) * m[k] + (b * b * b - b) * m[k + 1]) * h * h / 6.0;
            case 1:
                return (v[k + 1] - v[k]) / h - (3 * a * a - 1) / 6.0 * h * m[k] + (3 * b * b - 1) / 6.0 * h * m[k + 1];
            default:
                return a * m[k] + b * m[k + 1];
        }
    }

    bool closed_;
    std::vector<double> knots_, xs_, ys_, mx_, my_;
};

inline std::shared_ptr<ParametricArc> make_spline_arc(const std::vector<Vec2>& pts, bool closed) {
    auto sp = std::make_shared<CubicSpline2>(pts, closed);
    return std::make_shared<ParametricArc>([sp](double u) { return sp->eval(u, 0); },
                                           [sp](double u) { return sp->eval(u, 1); },
                                           [sp](double u) { return sp->eval(u, 2); }, 0.0, sp->u_max());
}

// ---------------------------------------------------------------------------
// Domain

enum class HitKind { transversal, grazing, corner };

struct BoundaryHit {
    double t = 0.0;   // travel distance
    double y = 0.0;   // arc-length of the hit point
    HitKind kind = HitKind::transversal;
    Vec2 point;
};

struct HitTolerances {
    double grazing_tol = 1e-6;
    double corner_tol = 1e-9;
};

/// Reflection symmetries of a domain about the coordinate axes, with the
/// boundary arc-length of a point fixed by each reflection.
struct AxisSymmetry {
    bool flip_y = false;       // (x, y) -> (x, -y)
    bool flip_x = false;       // (x, y) -> (-x, y)
    double anchor_flip_y = 0;  // arc-length of a boundary point on the x-axis
    double anchor_flip_x = 0;  // arc-length of a boundary point on the y-axis
};

class Domain {
public:
    Domain(std::vector<std::shared_ptr<const Arc>> arcs, std::vector<double> corner_positions,
           std::optional<double> area = std::nullopt, std::string name = "custom")
        : arcs_(std::move(arcs)), corners_(std::move(corner_positions)), name_(std::move(name)) {
        if (arcs_.empty()) fail(ErrorKind::InvalidArgument, "domain needs at least one arc");
        offsets_.push_back(0.0);
        for (const auto& a : arcs_) offsets_.push_back(offsets_.back() + a->length());
        perimeter_ = offsets_.back();
        for (std::size_t i = 0; i < arcs_.size(); ++i) {
            const Vec2 end = arcs_[i]->point(arcs_[i]->length());
            const Vec2 next = arcs_[(i + 1) % arcs_.size()]->point(0.0);
            if (distance(end, next) > 1e-9 * std::max(1.0, perimeter_))
                fail(ErrorKind::InvalidArgument, "arcs do not close head-to-tail");
        }
        std::sort(corners_.begin(), corners_.end());
        for (double c : corners_) {
            const Vec2 t_before = tangent_one_sided(c, -1), t_after = tangent_one_sided(c, +1);
            sharp_.push_back(std::abs(cross(t_before, t_after)) > 1e-6 || dot(t_before, t_after) < 0.0);
        }
        area_ = area ? *area : shoelace_area();
        if (!(area_ > 0.0) || !(perimeter_ > 0.0)) fail(ErrorKind::InvalidArgument, "domain must be counterclockwise with positive area");
        double diam = 0.0;
        for (int i = 0; i < 256; ++i)
            for (int j = i + 1; j < 256; ++j)
                diam = std::max(diam, distance(point(perimeter_ * i / 256), point(perimeter_ * j / 256)));
        diameter_ = diam;
    }

    // -- builtins -----------------------------------------------------------

    static Domain disc(double R) {
        Domain d({std::make_shared<CircleArc>(Vec2{0, 0}, R, 0.0, two_pi)}, {}, pi * R * R, "disc");
        d.symmetry_ = AxisSymmetry{true, true, 0.0, 0.5 * pi * R};
        return d;
    }

    /// Bunimovich stadium: flat sides of length 2a joined by caps of radius r.
    /// Arc-length origin is the bottom of the right cap, (a, -r).
    static Domain stadium(double a, double r) {
        std::vector<std::shared_ptr<const Arc>> arcs{
            std::make_shared<CircleArc>(Vec2{a, 0}, r, -0.5 * pi, pi),
            std::make_shared<LineArc>(Vec2{a, r}, Vec2{-a, r}),
            std::make_shared<CircleArc>(Vec2{-a, 0}, r, 0.5 * pi, pi),
            std::make_shared<LineArc>(Vec2{-a, -r}, Vec2{a, -r}),
        };
        const double L0 = pi * r, L1 = 2 * a;
        Domain d(std::move(arcs), {0.0, L0, L0 + L1, 2 * L0 + L1}, pi * r * r + 4 * a * r, "stadium");
        d.symmetry_ = AxisSymmetry{true, true, 0.5 * pi * r, pi * r + a};
        return d;
    }

    static Domain polygon(const std::vector<Vec2>& vertices) {
        if (vertices.size() < 3) fail(ErrorKind::InvalidArgument, "polygon needs >= 3 vertices");
        std::vector<Vec2> v = vertices;
        double signed_area = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) signed_area += cross(v[i], v[(i + 1) % v.size()]);
        if (signed_area < 0.0) std::reverse(v.begin(), v.end());
        std::vector<std::shared_ptr<const Arc>> arcs;
        std::vector<double> corners;
        double acc = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            corners.push_back(acc);
            auto a = std::make_shared<LineArc>(v[i], v[(i + 1) % v.size()]);
            acc += a->length();
            arcs.push_back(std::move(a));
        }
        return Domain(std::move(arcs), std::move(corners), 0.5 * std::abs(signed_area), "polygon");
    }

    /// Cardioid r = a (1 + cos theta); the cusp at the origin is the only corner.
    static Domain cardioid(double a) {
        auto p = [a](double th) { const double r = a * (1 + std::cos(th)); return Vec2{r * std::cos(th), r * std::sin(th)}; };
        auto dp = [a](double th) { return Vec2{a * (-std::sin(2 * th) - std::sin(th)), a * (std::cos(th) + std::cos(2 * th))}; };
        auto ddp = [a](double th) { return Vec2{a * (-2 * std::cos(2 * th) - std::cos(th)), a * (-std::sin(th) - 2 * std::sin(2 * th))}; };
        auto arc = std::make_shared<ParametricArc>(p, dp, ddp, -pi, pi);
        return Domain({arc}, {0.0}, 1.5 * pi * a * a, "cardioid");
    }

    static Domain spline(const std::vector<Vec2>& points) {
        std::vector<Vec2> pts = points;
        double sa = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) sa += cross(pts[i], pts[(i + 1) % pts.size()]);
        if (sa < 0.0) std::reverse(pts.begin(), pts.end());
        return Domain({make_spline_arc(pts, true)}, {}, std::nullopt, "spline");
    }

    // -- accessors ----------------------------------------------------------

    double perimeter() const { return perimeter_; }
    double area() const { return area_; }
    double diameter() const { return diameter_; }
    const std::string& name() const { return name_; }
    const std::vector<double>& corners() const { return corners_; }
    bool corner_is_sharp(std::size_t i) const { return sharp_[i]; }
    bool has_sharp_corners() const { return std::any_of(sharp_.begin(), sharp_.end(), [](bool b) { return b; }); }
    const std::optional<AxisSymmetry>& symmetry() const { return symmetry_; }
    const std::vector<std::shared_ptr<const Arc>>& arcs() const { return arcs_; }

    double wrap(double y) const {
        double w = std::fmod(y, perimeter_);
        if (w < 0.0) w += perimeter_;
        if (w >= perimeter_) w = 0.0;
        return w;
    }

    /// Arc-length distance on the boundary circle.
    double arc_distance(double y1, double y2) const {
        const double d = std::abs(wrap(y1) - wrap(y2));
        return std::min(d, perimeter_ - d);
    }

    double corner_distance(double y) const {
        double best = std::numeric_limits<double>::infinity();
        for (double c : corners_) best = std::min(best, arc_distance(y, c));
        return best;
    }

    Vec2 point(double y) const {
        const auto [i, s] = locate(y);
        return arcs_[i]->point(s);
    }

    /// Point with tangent, inward normal and curvature. Throws CornerQuery at
    /// a junction of arcs.
    Frame frame(double y) const {
        if (corner_distance(y) <= 4.0 * std::numeric_limits<double>::epsilon() * perimeter_)
            fail(ErrorKind::CornerQuery, "differential query at a corner, y = " + std::to_string(y));
        const auto [i, s] = locate(y);
        return arcs_[i]->frame(s);
    }

    /// Frame taken from the arc that contains y (no corner check).
    Frame frame_unchecked(double y) const {
        const auto [i, s] = locate(y);
        return arcs_[i]->frame(s);
    }

    /// First boundary point reached from x along the unit direction dir.
    BoundaryHit first_hit(Vec2 x, Vec2 dir, const HitTolerances& tol = {}) const {
        std::vector<RayArcHit> hits;
        const double t_min = 1e-10 * diameter_;
        BoundaryHit best;
        best.t = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < arcs_.size(); ++i) {
            hits.clear();
            arcs_[i]->intersect_ray(x, dir, t_min, 4.0 * diameter_, hits);
            for (const auto& h : hits) {
                if (h.t < best.t) {
                    best.t = h.t;
                    best.y = wrap(offsets_[i] + h.s);
                }
            }
        }
        if (!std::isfinite(best.t)) fail(ErrorKind::NoHit, "ray does not meet the boundary");
        best.point = x + best.t * dir;
        if (corner_distance(best.y) <= tol.corner_tol) {
            best.kind = HitKind::corner;
        } else {
            const Frame f = frame_unchecked(best.y);
            best.kind = std::abs(dot(dir, f.normal)) < tol.grazing_tol ? HitKind::grazing : HitKind::transversal;
        }
        return best;
    }

    /// All boundary crossings of the ray, sorted by t.
    std::vector<double> all_hit_times(Vec2 x, Vec2 dir) const {
        std::vector<RayArcHit> hits;
        for (const auto& a : arcs_) a->intersect_ray(x, dir, 0.0, 4.0 * diameter_ + norm(x) * 4.0, hits);
        std::vector<double> ts;
        for (const auto& h : hits) ts.push_back(h.t);
        std::sort(ts.begin(), ts.end());
        return ts;
    }

    bool contains(Vec2 x) const {
        // parity along two skew directions; disagreement means we sit on a tangency
        const std::array<Vec2, 3> dirs{normalized(Vec2{0.8191520442889918, 0.5735764363510461}),
                                       normalized(Vec2{-0.3090169943749474, 0.9510565162951535}),
                                       normalized(Vec2{-0.6, -0.8})};
        int inside_votes = 0;
        for (const Vec2 d : dirs) inside_votes += (all_hit_times(x, d).size() % 2 == 1) ? 1 : 0;
        return inside_votes >= 2;
    }

    double distance_to_boundary(Vec2 x) const { return closest_boundary_point(x).first; }

    /// Distance to the boundary and the arc-length y of the closest point.
    std::pair<double, double> closest_boundary_point(Vec2 x) const {
        std::pair<double, double> best{std::numeric_limits<double>::infinity(), 0.0};
        for (std::size_t i = 0; i < arcs_.size(); ++i) {
            const auto [d, s] = arcs_[i]->closest(x);
            if (d < best.first) best = {d, wrap(offsets_[i] + s)};
        }
        return best;
    }

    /// Axis-aligned bounding box {xmin, xmax, ymin, ymax}.
    std::array<double, 4> bounding_box() const {
        std::array<double, 4> bb{1e300, -1e300, 1e300, -1e300};
        const int n = 2048;
        for (int i = 0; i < n; ++i) {
            const Vec2 p = point(perimeter_ * i / n);
            bb[0] = std::min(bb[0], p.x);
            bb[1] = std::max(bb[1], p.x);
            bb[2] = std::min(bb[2], p.y);
            bb[3] = std::max(bb[3], p.y);
        }
        const double pad = 1e-3 * diameter_;
        return {bb[0] - pad, bb[1] + pad, bb[2] - pad, bb[3] + pad};
    }

    std::pair<std::size_t, double> locate(double y) const {
        y = wrap(y);
        auto it = std::upper_bound(offsets_.begin(), offsets_.end(), y);
        std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, (it - offsets_.begin()) - 1));
        i = std::min(i, arcs_.size() - 1);
        return {i, std::clamp(y - offsets_[i], 0.0, arcs_[i]->length())};
    }

    const std::vector<double>& arc_offsets() const { return offsets_; }

private:
    Vec2 tangent_one_sided(double y, int side) const {
        const double h = 1e-12 * perimeter_;
        const double p = wrap(y + side * h);
        const auto [i, s] = locate(p);
        return arcs_[i]->tangent(s);
    }

    double shoelace_area() const {
        double a = 0.0;
        for (const auto& arc : arcs_) {
            const int panels = 256;
            for (int k = 0; k < panels; ++k) {
                const double s0 = arc->length() * k / panels, s1 = arc->length() * (k + 1) / panels;
                a += integrate_gl16([&](double s) { return 0.5 * cross(arc->point(s), arc->tangent(s)); }, s0, s1);
            }
        }
        return a;
    }

    std::vector<std::shared_ptr<const Arc>> arcs_;
    std::vector<double> offsets_;
    std::vector<double> corners_;
    std::vector<bool> sharp_;
    double perimeter_ = 0.0, area_ = 0.0, diameter_ = 0.0;
    std::string name_;
    std::optional<AxisSymmetry> symmetry_;
};

// ---------------------------------------------------------------------------
// Interior curves

struct CurveHit {
    double t = 0.0;
    double s = 0.0;
    double incidence_cosine = 0.0;  // <dir, nu_plus(s)>
    bool tangential = false;
};

class InteriorCurve {
public:
    /// normal_side = +1 takes nu_+ as the left normal (+90 degrees from the tangent).
    InteriorCurve(std::shared_ptr<const Arc> arc, bool closed, int normal_side, std::string kind)
        : arc_(std::move(arc)), closed_(closed), side_(normal_side >= 0 ? 1 : -1), kind_(std::move(kind)) {}

    static InteriorCurve segment(Vec2 a, Vec2 b, int normal_side = 1) {
        return {std::make_shared<LineArc>(a, b), false, normal_side, "segment"};
    }
    static InteriorCurve circle(Vec2 c, double r, int normal_side = 1) {
        return {std::make_shared<CircleArc>(c, r, 0.0, two_pi), true, normal_side, "circle"};
    }
    static InteriorCurve ellipse(Vec2 c, double ax, double by, int normal_side = 1) {
        auto arc = std::make_shared<ParametricArc>(
            [=](double u) { return Vec2{c.x + ax * std::cos(u), c.y + by * std::sin(u)}; },
            [=](double u) { return Vec2{-ax * std::sin(u), by * std::cos(u)}; },
            [=](double u) { return Vec2{-ax * std::cos(u), -by * std::sin(u)}; }, 0.0, two_pi);
        return {arc, true, normal_side, "ellipse"};
    }
    static InteriorCurve spline(const std::vector<Vec2>& pts, bool closed, int normal_side = 1) {
        return {make_spline_arc(pts, closed), closed, normal_side, "spline"};
    }

    double length() const { return arc_->length(); }
    bool closed() const { return closed_; }
    const std::string& kind() const { return kind_; }
    bool analytic() const { return kind_ != "spline"; }
    Vec2 point(double s) const { return arc_->point(wrap(s)); }
    Vec2 tangent(double s) const { return arc_->tangent(wrap(s)); }
    Vec2 normal_plus(double s) const { return static_cast<double>(side_) * perp(tangent(s)); }
    int normal_side() const { return side_; }
    const Arc& arc() const { return *arc_; }

    double wrap(double s) const {
        if (!closed_) return std::clamp(s, 0.0, length());
        double w = std::fmod(s, length());
        if (w < 0.0) w += length();
        return w;
    }

    /// Crossings of x + t dir with the curve for t in (0, t_max), ordered by t.
    /// A ray running along a straight curve yields one entry flagged tangential.
    std::vector<CurveHit> intersections(Vec2 x, Vec2 dir, double t_max, double tangency_tol = 5e-13) const {
        std::vector<CurveHit> out;
        if (const auto* line = dynamic_cast<const LineArc*>(arc_.get())) {
            const Vec2 T = line->tangent(0.0);
            if (std::abs(cross(dir, T)) < 1e-15) {
                const double off = cross(T, x - line->start());
                if (std::abs(off) < 1e-12 * std::max(1.0, length())) {
                    const double t_start = dot(line->start() - x, dir), t_end = dot(line->end() - x, dir);
                    const double t = std::max(std::min(t_start, t_end), 0.0);
                    if (t < t_max && std::max(t_start, t_end) > 0.0)
                        out.push_back({t, std::clamp(dot(x + t * dir - line->start(), T), 0.0, length()), 0.0, true});
                }
                return out;
            }
        }
        std::vector<RayArcHit> hits;
        arc_->intersect_ray(x, dir, 0.0, t_max, hits);
        std::sort(hits.begin(), hits.end(), [](const RayArcHit& a, const RayArcHit& b) { return a.t < b.t; });
        for (const auto& h : hits) {
            CurveHit c;
            c.t = h.t;
            c.s = h.s;
            c.incidence_cosine = dot(dir, normal_plus(h.s));
            c.tangential = std::abs(dot(dir, tangent(h.s))) > 1.0 - tangency_tol;
            out.push_back(c);
        }
        return out;
    }

    /// Smallest distance between the curve and the boundary of `domain`;
    /// negative if any sampled curve point lies outside.
    double clearance(const Domain& domain, int samples = 1024) const {
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= samples; ++i) {
            const Vec2 p = point(length() * i / samples);
            double d = domain.distance_to_boundary(p);
            if (!domain.contains(p)) d = -d;
            best = std::min(best, d);
        }
        return best;
    }

private:
    std::shared_ptr<const Arc> arc_;
    bool closed_;
    int side_;
    std::string kind_;
};

/// Throws ClearanceViolation unless the curve is strictly inside with at least
/// `min_clearance` distance to the boundary.
inline void require_clearance(const Domain& domain, const InteriorCurve& curve, double min_clearance = 0.0) {
    const double c = curve.clearance(domain);
    if (!(c > min_clearance))
        fail(ErrorKind::ClearanceViolation,
             "curve clearance " + std::to_string(c) + " must exceed " + std::to_string(min_clearance));
}

}  // namespace qerlab
