#pragma once

// Interior evaluation, normalization and curve restriction of eigenmodes.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "qerlab/boundary_grid.hpp"
#include "qerlab/errors.hpp"
#include "qerlab/fourier.hpp"
#include "qerlab/geometry.hpp"
#include "qerlab/layer.hpp"
#include "qerlab/numerics.hpp"
#include "qerlab/spectrum.hpp"

namespace qerlab {

inline BoundaryGrid grid_for(const Domain& domain, const EigenMode& mode) {
    BoundaryGrid grid(domain, mode.n_nodes, mode.grading);
    if (grid.size() != static_cast<int>(mode.trace.size()))
        fail(ErrorKind::InvalidArgument, "trace has " + std::to_string(mode.trace.size()) + " values, grid has " +
                                             std::to_string(grid.size()) + " nodes");
    return grid;
}

/// A mode bound to its boundary grid, with the trace and its tangential
/// derivatives available at any boundary point by trigonometric interpolation.
class ModeField {
public:
    ModeField(const Domain& domain, const EigenMode& mode)
        : domain_(&domain), lambda_(mode.lambda), bc_(mode.bc), grid_(grid_for(domain, mode)), trace_(mode.trace) {
        const int n = grid_.size();
        const auto ut = periodic_derivative(trace_);
        us_.resize(n);
        for (int j = 0; j < n; ++j) us_[j] = ut[j] / grid_.speed(j);
        const auto ust = periodic_derivative(us_);
        uss_.resize(n);
        for (int j = 0; j < n; ++j) uss_[j] = ust[j] / grid_.speed(j);
        const double t0 = grid_.node_param(0);
        u_i_ = PeriodicInterpolant(trace_, t0);
        us_i_ = PeriodicInterpolant(us_, t0);
        uss_i_ = PeriodicInterpolant(uss_, t0);
    }

    const Domain& domain() const { return *domain_; }
    const BoundaryGrid& grid() const { return grid_; }
    double lambda() const { return lambda_; }
    BoundaryCondition bc() const { return bc_; }
    const std::vector<cplx>& trace() const { return trace_; }
    /// d/ds of the trace at the nodes.
    const std::vector<cplx>& trace_s() const { return us_; }

    cplx trace_at(double y) const { return u_i_(grid_.param_of(y)); }

    /// Clearance below which the layer quadrature is not trusted.
    double min_clearance() const { return 2.0 * grid_.max_spacing(); }

    /// Layer representation at x with no distance checks.
    FieldValue raw(Vec2 x, bool with_gradient = true) const { return layer_field(grid_, trace_, lambda_, bc_, x, with_gradient); }

    /// Field and gradient at an interior point with clearance >= 2 grid spacings.
    FieldValue interior(Vec2 x, bool with_gradient = true) const {
        if (!domain_->contains(x)) fail(ErrorKind::TooCloseToBoundary, "point lies outside the domain");
        const double d = domain_->distance_to_boundary(x);
        if (d < min_clearance())
            fail(ErrorKind::TooCloseToBoundary, "clearance " + std::to_string(d) + " below " + std::to_string(min_clearance()));
        return raw(x, with_gradient);
    }

    /// Field value anywhere inside the domain: the layer quadrature far from
    /// the boundary, an upsampled quadrature in a strip, and a second-order
    /// expansion off the boundary data very close to it.
    cplx value_anywhere(Vec2 x) const {
        const auto [d, y] = domain_->closest_boundary_point(x);
        const double h = grid_.max_spacing();
        if (d >= 3.0 * h) return raw(x, false).value;
        if (d >= 0.5 * h) return layer_field(fine_grid(), fine_trace_, lambda_, bc_, x, false).value;
        const double t = grid_.param_of(y);
        const cplx u = u_i_(t);
        if (bc_ == BoundaryCondition::neumann) return u + 0.5 * d * d * (-lambda_ * lambda_ * u - uss_i_(t));
        const double kappa = domain_->frame_unchecked(y).curvature;
        return lambda_ * u * (d + 0.5 * kappa * d * d);
    }

    /// ||phi||^2 from the Rellich identity with the origin as center.
    double rellich_norm2() const {
        const double l2 = lambda_ * lambda_;
        double s = 0.0;
        for (int j = 0; j < grid_.size(); ++j) {
            const Frame& f = grid_.frame(j);
            const double xn = -dot(f.point, f.normal);
            if (bc_ == BoundaryCondition::neumann)
                s += grid_.weight(j) * xn * (l2 * std::norm(trace_[j]) - std::norm(us_[j]));
            else
                s += grid_.weight(j) * xn * std::norm(trace_[j]);
        }
        return bc_ == BoundaryCondition::neumann ? s / (2.0 * l2) : 0.5 * s;
    }

private:
    const BoundaryGrid& fine_grid() const {
        if (!fine_) {
            fine_ = std::make_unique<BoundaryGrid>(*domain_, 4 * grid_.requested_size(), grid_.grading());
            fine_trace_.resize(fine_->size());
            for (int j = 0; j < fine_->size(); ++j) fine_trace_[j] = u_i_(grid_.param_of(fine_->y(j)));
        }
        return *fine_;
    }

    const Domain* domain_;
    double lambda_;
    BoundaryCondition bc_;
    BoundaryGrid grid_;
    std::vector<cplx> trace_, us_, uss_;
    PeriodicInterpolant u_i_, us_i_, uss_i_;
    mutable std::unique_ptr<BoundaryGrid> fine_;
    mutable std::vector<cplx> fine_trace_;
};

inline FieldValue evaluate_interior(const Domain& domain, const EigenMode& mode, Vec2 x, bool with_gradient = true) {
    return ModeField(domain, mode).interior(x, with_gradient);
}

struct NormalizeOptions {
    bool rellich_only = false;   // skip the interior quadrature and scale by the Rellich norm
    double points_per_lambda2 = 64.0;
    int min_points = 40000;
    int max_points = 400000;
    double tolerance = 0.05;     // allowed relative interior/Rellich discrepancy
    int threads = 1;
};

/// ||phi||^2 over the domain from Halton points in the bounding box.
inline double interior_norm2(const ModeField& field, const NormalizeOptions& opt = {}) {
    const Domain& domain = field.domain();
    const double l = field.lambda();
    const int n = std::clamp(static_cast<int>(std::ceil(opt.points_per_lambda2 * l * l)), opt.min_points, opt.max_points);
    const auto box = domain.bounding_box();
    const double bw = box[1] - box[0], bh = box[3] - box[2];
    // force the upsampled grid before the parallel section
    (void)field.value_anywhere(field.grid().frame(0).point + 0.75 * field.grid().max_spacing() * field.grid().frame(0).normal);
    std::vector<double> vals(static_cast<std::size_t>(n), 0.0);
    parallel_for(static_cast<std::size_t>(n), opt.threads, [&](std::size_t i) {
        const Vec2 x{box[0] + bw * radical_inverse(i + 1, 2), box[2] + bh * radical_inverse(i + 1, 3)};
        if (domain.contains(x)) vals[i] = std::norm(field.value_anywhere(x));
    });
    double s = 0.0;
    for (double v : vals) s += v;
    return bw * bh * s / n;
}

/// Scales the trace so that ||phi||_{L^2} = 1, recording both norm estimates.
inline EigenMode normalize_mode(const Domain& domain, const EigenMode& mode, const NormalizeOptions& opt = {}) {
    const ModeField field(domain, mode);
    const double rel = field.rellich_norm2();
    EigenMode out = mode;
    double norm2 = rel;
    if (opt.rellich_only) {
        out.norm_interior = std::numeric_limits<double>::quiet_NaN();
        out.normalization_discrepancy = std::numeric_limits<double>::quiet_NaN();
    } else {
        norm2 = interior_norm2(field, opt);
        const double disc = std::abs(rel - norm2) / norm2;
        out.norm_interior = norm2;
        out.normalization_discrepancy = disc;
        if (!(disc <= opt.tolerance))
            fail(ErrorKind::NormalizationMismatch, "interior norm " + std::to_string(norm2) + " vs Rellich " +
                                                       std::to_string(rel) + " at lambda=" + std::to_string(mode.lambda));
    }
    if (!(norm2 > 0.0)) fail(ErrorKind::NormalizationMismatch, "non-positive norm at lambda=" + std::to_string(mode.lambda));
    out.norm_rellich = rel;
    const double scale = 1.0 / std::sqrt(norm2);
    for (auto& u : out.trace) u *= scale;
    out.normalized = true;
    return out;
}

// ---------------------------------------------------------------------------
// Curves

/// Quadrature nodes on an interior curve: uniform trapezoid for closed curves,
/// composite Simpson (odd count, endpoints included) for open ones.
struct CurveGrid {
    std::vector<double> s;
    std::vector<double> w;
    bool closed = true;
    double length = 0.0;

    int size() const { return static_cast<int>(s.size()); }
    /// Node spacing.
    double spacing() const { return s.size() > 1 ? s[1] - s[0] : length; }
};

inline CurveGrid make_curve_grid(const InteriorCurve& H, int n) {
    CurveGrid g;
    g.closed = H.closed();
    g.length = H.length();
    const double L = H.length();
    if (H.closed()) {
        if (n < 4) fail(ErrorKind::InvalidArgument, "closed curve grid needs at least 4 nodes");
        for (int j = 0; j < n; ++j) {
            g.s.push_back(L * j / n);
            g.w.push_back(L / n);
        }
    } else {
        if (n < 3) fail(ErrorKind::InvalidArgument, "open curve grid needs at least 3 nodes");
        if (n % 2 == 0) ++n;
        const double h = L / (n - 1);
        for (int j = 0; j < n; ++j) {
            g.s.push_back(h * j);
            const double c = (j == 0 || j == n - 1) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
            g.w.push_back(c * h / 3.0);
        }
    }
    return g;
}

/// Curve grid resolving lambda with `per_wavelength` nodes; closed grids use a power of two.
inline CurveGrid curve_grid_for(const InteriorCurve& H, double lambda, double per_wavelength = 8.0, int min_nodes = 64) {
    int n = std::max(min_nodes, static_cast<int>(std::ceil(per_wavelength * lambda * H.length() / two_pi)));
    if (H.closed()) {
        int p = 8;
        while (p < n) p *= 2;
        n = p;
    }
    return make_curve_grid(H, n);
}

/// Cauchy data of a mode on an interior curve: u^H = phi|_H and
/// u^{H,nu} = lambda^{-1} d/dnu_+ phi|_H at the curve grid nodes, plus the
/// scaled tangential derivative lambda^{-1} d/ds phi|_H.
struct CurveRestriction {
    std::vector<cplx> value;
    std::vector<cplx> normal;
    std::vector<cplx> tangential;
    double lambda = 0.0;
};

inline CurveRestriction restrict_cauchy_data(const ModeField& field, const InteriorCurve& H, const CurveGrid& g, int threads = 1) {
    require_clearance(field.domain(), H, field.min_clearance());
    CurveRestriction r;
    r.lambda = field.lambda();
    r.value.resize(g.s.size());
    r.normal.resize(g.s.size());
    r.tangential.resize(g.s.size());
    parallel_for(g.s.size(), threads, [&](std::size_t j) {
        const Vec2 x = H.point(g.s[j]);
        const Vec2 nu = H.normal_plus(g.s[j]);
        const Vec2 T = H.tangent(g.s[j]);
        const FieldValue f = field.raw(x, true);
        r.value[j] = f.value;
        r.normal[j] = (f.grad[0] * nu.x + f.grad[1] * nu.y) / field.lambda();
        r.tangential[j] = (f.grad[0] * T.x + f.grad[1] * T.y) / field.lambda();
    });
    return r;
}

inline std::vector<cplx> restrict_to_curve(const Domain& domain, const InteriorCurve& H, const EigenMode& mode, const CurveGrid& g) {
    const ModeField field(domain, mode);
    require_clearance(domain, H, field.min_clearance());
    std::vector<cplx> out(g.s.size());
    for (std::size_t j = 0; j < g.s.size(); ++j) out[j] = field.raw(H.point(g.s[j]), false).value;
    return out;
}

inline std::vector<cplx> restrict_normal_derivative(const Domain& domain, const InteriorCurve& H, const EigenMode& mode,
                                                    const CurveGrid& g) {
    return restrict_cauchy_data(ModeField(domain, mode), H, g).normal;
}

}  // namespace qerlab
