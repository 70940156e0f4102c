#pragma once

// Phase-space dynamics on the coball bundles of the boundary and of an
// interior curve H: the billiard map, transfer maps between the boundary and
// H, the once-broken transmission map through H, one-sided return maps and a
// Monte-Carlo estimator for the set where the transmission map commutes with
// billiard iterates.
//
// Conventions: a boundary covector (y, eta) stands for the inward unit vector
// zeta(y, eta) = eta T_y + gamma nu_y leaving q(y). Its backward link is the
// ray from q(y) along zeta(y, -eta); the physical motion along it arrives at
// q(y). A curve covector (s, tau) with side +/- stands for
// xi = tau T_s + sqrt(1 - tau^2) nu_{+/-}.

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "qerlab/errors.hpp"
#include "qerlab/geometry.hpp"

namespace qerlab {

struct BoundaryPhasePoint {
    double y = 0.0;
    double eta = 0.0;
};

enum class Side { plus, minus };

inline Side opposite(Side s) { return s == Side::plus ? Side::minus : Side::plus; }

struct CurvePhasePoint {
    double s = 0.0;
    double tau = 0.0;
    std::optional<Side> side;
};

enum class MapStatus { regular, grazing, corner, no_intersection };

inline const char* status_name(MapStatus s) {
    switch (s) {
        case MapStatus::regular: return "regular";
        case MapStatus::grazing: return "grazing";
        case MapStatus::corner: return "corner";
        case MapStatus::no_intersection: return "no_intersection";
    }
    return "?";
}

template <class Point>
struct MapResult {
    Point point{};
    MapStatus status = MapStatus::regular;
    double path_length = 0.0;
    std::optional<int> branch;
    int steps = 0;  // completed regular steps (iterates)

    bool regular() const { return status == MapStatus::regular; }
};

using BoundaryResult = MapResult<BoundaryPhasePoint>;
using CurveResult = MapResult<CurvePhasePoint>;

inline double gamma_factor(double eta) { return std::sqrt(std::max(0.0, 1.0 - eta * eta)); }

/// Product metric sqrt(d_boundary(y, y')^2 + (eta - eta')^2).
inline double phase_distance(const Domain& domain, const BoundaryPhasePoint& a, const BoundaryPhasePoint& b) {
    const double dy = domain.arc_distance(a.y, b.y);
    const double de = a.eta - b.eta;
    return std::sqrt(dy * dy + de * de);
}

/// Inward unit vector over (y, eta).
inline Vec2 lift(const Domain& domain, const BoundaryPhasePoint& p) {
    const Frame f = domain.frame(p.y);
    return p.eta * f.tangent + gamma_factor(p.eta) * f.normal;
}

inline Vec2 lift(const InteriorCurve& H, const CurvePhasePoint& c, Side side) {
    const Vec2 nu = (side == Side::plus ? 1.0 : -1.0) * H.normal_plus(c.s);
    return c.tau * H.tangent(c.s) + gamma_factor(c.tau) * nu;
}

struct DynamicsOptions {
    HitTolerances hit;
};

namespace detail {

inline MapStatus status_of(HitKind k) {
    switch (k) {
        case HitKind::transversal: return MapStatus::regular;
        case HitKind::grazing: return MapStatus::grazing;
        case HitKind::corner: return MapStatus::corner;
    }
    return MapStatus::regular;
}

/// Ride the ray from x along dir to the boundary and project the arriving
/// direction to the boundary tangent.
inline BoundaryResult ride_to_boundary(const Domain& domain, Vec2 x, Vec2 dir, const DynamicsOptions& opt) {
    BoundaryResult r;
    BoundaryHit hit;
    try {
        hit = domain.first_hit(x, dir, opt.hit);
    } catch (const Error&) {
        r.status = MapStatus::grazing;
        return r;
    }
    r.path_length = hit.t;
    r.point.y = hit.y;
    r.status = status_of(hit.kind);
    if (r.status != MapStatus::regular) return r;
    const Frame f = domain.frame_unchecked(hit.y);
    r.point.eta = dot(dir, f.tangent);
    if (std::abs(r.point.eta) >= 1.0) r.status = MapStatus::grazing;
    return r;
}

}  // namespace detail

/// One bounce: follow zeta(y, eta) to the next boundary point, reflect
/// specularly and record the tangential momentum there.
inline BoundaryResult billiard_map(const Domain& domain, const BoundaryPhasePoint& p, const DynamicsOptions& opt = {}) {
    if (!(std::abs(p.eta) < 1.0)) fail(ErrorKind::InvalidArgument, "|eta| must be < 1");
    BoundaryResult r;
    r.point = p;
    if (domain.corner_distance(p.y) <= opt.hit.corner_tol) {
        r.status = MapStatus::corner;
        return r;
    }
    const Frame f = domain.frame_unchecked(p.y);
    const Vec2 zeta = p.eta * f.tangent + gamma_factor(p.eta) * f.normal;
    r = detail::ride_to_boundary(domain, f.point, zeta, opt);
    if (r.regular()) r.steps = 1;
    return r;
}

/// Time reversal (y, eta) -> (y, -eta).
inline BoundaryPhasePoint reverse(const BoundaryPhasePoint& p) { return {p.y, -p.eta}; }

/// beta^k; negative k uses beta^{-1} = R beta R with R the momentum flip.
/// Stops at the first non-regular step; `steps` reports how many completed.
inline BoundaryResult billiard_iterate(const Domain& domain, const BoundaryPhasePoint& p, int k, const DynamicsOptions& opt = {}) {
    BoundaryResult acc;
    acc.point = p;
    const bool backward = k < 0;
    BoundaryPhasePoint cur = backward ? reverse(p) : p;
    for (int i = 0; i < std::abs(k); ++i) {
        const BoundaryResult step = billiard_map(domain, cur, opt);
        if (!step.regular()) {
            acc.status = step.status;
            acc.point = backward ? reverse(cur) : cur;
            return acc;
        }
        cur = step.point;
        acc.path_length += step.path_length;
        ++acc.steps;
    }
    acc.point = backward ? reverse(cur) : cur;
    return acc;
}

/// Boundary-to-curve transfer: one result per crossing of the backward link of
/// (y, eta) with H, ordered by distance from q(y). tau is the tangential part
/// of the physical direction at the crossing and `side` the side of H that
/// direction points into. Tangential crossings come back with status grazing.
inline std::vector<CurveResult> transfer_to_curve(const Domain& domain, const InteriorCurve& H, const BoundaryPhasePoint& p,
                                                  const DynamicsOptions& opt = {}) {
    if (!(std::abs(p.eta) < 1.0)) fail(ErrorKind::InvalidArgument, "|eta| must be < 1");
    std::vector<CurveResult> out;
    if (domain.corner_distance(p.y) <= opt.hit.corner_tol) return out;
    const Frame f = domain.frame_unchecked(p.y);
    const Vec2 back = -p.eta * f.tangent + gamma_factor(p.eta) * f.normal;
    double t_max = 0.0;
    try {
        t_max = domain.first_hit(f.point, back, opt.hit).t;
    } catch (const Error&) {
        return out;
    }
    const auto hits = H.intersections(f.point, back, t_max);
    int j = 0;
    for (const auto& h : hits) {
        CurveResult r;
        r.branch = j++;
        r.path_length = h.t;
        const Vec2 xi = -back;
        r.point.s = h.s;
        r.point.tau = dot(xi, H.tangent(h.s));
        r.point.side = dot(xi, H.normal_plus(h.s)) > 0.0 ? Side::plus : Side::minus;
        if (h.tangential || std::abs(r.point.tau) >= 1.0) r.status = MapStatus::grazing;
        out.push_back(r);
    }
    return out;
}

/// Curve-to-boundary branch tau_side: lift (s, tau) to the requested side and
/// ride the straight ray to the boundary.
inline BoundaryResult transfer_from_curve(const Domain& domain, const InteriorCurve& H, const CurvePhasePoint& c,
                                          const DynamicsOptions& opt = {}) {
    if (!(std::abs(c.tau) < 1.0)) fail(ErrorKind::InvalidArgument, "|tau| must be < 1");
    if (!c.side) fail(ErrorKind::InvalidArgument, "curve point needs a side");
    const Vec2 xi = lift(H, c, *c.side);
    BoundaryResult r = detail::ride_to_boundary(domain, H.point(c.s), xi, opt);
    if (r.regular()) r.steps = 1;
    return r;
}

/// Once-broken transmission map: follow the backward link to each crossing
/// with H, break there by the law of equal angles and continue to the boundary.
inline std::vector<BoundaryResult> transmission_map(const Domain& domain, const InteriorCurve& H, const BoundaryPhasePoint& p,
                                                    const DynamicsOptions& opt = {}) {
    std::vector<BoundaryResult> out;
    for (const auto& branch : transfer_to_curve(domain, H, p, opt)) {
        BoundaryResult r;
        r.branch = branch.branch;
        if (!branch.regular()) {
            r.status = branch.status;
            out.push_back(r);
            continue;
        }
        CurvePhasePoint other = branch.point;
        other.side = opposite(*branch.point.side);
        r = transfer_from_curve(domain, H, other, opt);
        r.branch = branch.branch;
        r.path_length += branch.path_length;
        out.push_back(r);
    }
    return out;
}

/// Inverse of tau_side at a boundary point: the crossing nearest to q(y) along
/// the backward link whose physical direction points into `side`.
inline CurveResult inverse_transfer(const Domain& domain, const InteriorCurve& H, const BoundaryPhasePoint& p, Side side,
                                    const DynamicsOptions& opt = {}) {
    for (const auto& r : transfer_to_curve(domain, H, p, opt)) {
        if (r.point.side == side) return r;
    }
    CurveResult none;
    none.status = MapStatus::no_intersection;
    return none;
}

/// tau_side^{-1} beta^k tau_side: the side-to-side return map to B*H after k
/// bounces.
inline CurveResult one_sided_return_map(const Domain& domain, const InteriorCurve& H, const CurvePhasePoint& c, Side side,
                                        int k, const DynamicsOptions& opt = {}) {
    CurvePhasePoint start = c;
    start.side = side;
    const BoundaryResult out = transfer_from_curve(domain, H, start, opt);
    CurveResult r;
    if (!out.regular()) {
        r.status = out.status;
        return r;
    }
    const BoundaryResult it = billiard_iterate(domain, out.point, k, opt);
    if (!it.regular()) {
        r.status = it.status;
        r.steps = it.steps;
        return r;
    }
    r = inverse_transfer(domain, H, it.point, side, opt);
    r.steps = it.steps;
    if (r.regular()) r.path_length += out.path_length + it.path_length;
    return r;
}

/// Left-right reflection x -> -x induced on the boundary coball bundle.
/// Requires a domain with the flip_x symmetry.
inline BoundaryPhasePoint reflect_left_right(const Domain& domain, const BoundaryPhasePoint& p) {
    const auto& sym = domain.symmetry();
    if (!sym || !sym->flip_x) fail(ErrorKind::InvalidArgument, "domain has no left-right symmetry");
    return {domain.wrap(2.0 * sym->anchor_flip_x - p.y), -p.eta};
}

// ---------------------------------------------------------------------------
// Commutation-set estimator

struct CommutationEstimate {
    int p = 0;
    int k = 0;
    double delta = 0.0;
    double fraction = 0.0;
    double stderr_ = 0.0;
    double excluded_fraction = 0.0;   // outside the domain of either composite or non-regular
    double nonregular_fraction = 0.0; // grazing / corner only
    std::uint64_t n_samples = 0;
    std::uint64_t n_used = 0;
    std::uint64_t seed = 0;
};

inline BoundaryPhasePoint uniform_phase_point(const Domain& domain, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uy(0.0, domain.perimeter());
    std::uniform_real_distribution<double> ue(-1.0, 1.0);
    BoundaryPhasePoint p{uy(rng), ue(rng)};
    while (!(std::abs(p.eta) < 1.0)) p.eta = ue(rng);
    return p;
}

/// Smallest distance between beta_H beta^k (y, eta) and beta^p beta_H (y, eta)
/// over all branch pairings, or nullopt when either side is undefined.
/// `nonregular` is set when a grazing or corner status interrupted the
/// evaluation.
inline std::optional<double> commutation_defect(const Domain& domain, const InteriorCurve& H, const BoundaryPhasePoint& x,
                                                int p, int k, bool& nonregular, const DynamicsOptions& opt = {}) {
    nonregular = false;
    const BoundaryResult bk = billiard_iterate(domain, x, k, opt);
    if (!bk.regular()) {
        nonregular = true;
        return std::nullopt;
    }
    const auto left = transmission_map(domain, H, bk.point, opt);
    const auto right0 = transmission_map(domain, H, x, opt);
    if (left.empty() || right0.empty()) return std::nullopt;
    std::vector<BoundaryPhasePoint> lhs, rhs;
    for (const auto& r : left) {
        if (!r.regular()) {
            nonregular = true;
            return std::nullopt;
        }
        lhs.push_back(r.point);
    }
    for (const auto& r : right0) {
        if (!r.regular()) {
            nonregular = true;
            return std::nullopt;
        }
        const BoundaryResult bp = billiard_iterate(domain, r.point, p, opt);
        if (!bp.regular()) {
            nonregular = true;
            return std::nullopt;
        }
        rhs.push_back(bp.point);
    }
    double best = std::numeric_limits<double>::infinity();
    for (const auto& a : lhs)
        for (const auto& b : rhs) best = std::min(best, phase_distance(domain, a, b));
    return best;
}

/// Fraction of (y, eta), drawn uniformly for dy d(eta), at which the
/// commutation defect is below delta. Samples where a composite is undefined
/// are excluded; DegenerateSampling if more than half are non-regular.
inline CommutationEstimate commutation_fraction(const Domain& domain, const InteriorCurve& H, int p, int k, double delta,
                                                std::uint64_t n_samples, std::uint64_t seed, const DynamicsOptions& opt = {}) {
    if (n_samples < 1) fail(ErrorKind::InvalidArgument, "n_samples must be >= 1");
    if (!(delta > 0.0)) fail(ErrorKind::InvalidArgument, "delta must be > 0");
    CommutationEstimate est;
    est.p = p;
    est.k = k;
    est.delta = delta;
    est.n_samples = n_samples;
    est.seed = seed;
    std::uint64_t hits = 0, used = 0, nonreg = 0;
    for (std::uint64_t i = 0; i < n_samples; ++i) {
        std::mt19937_64 rng(sample_seed(seed, i));
        const BoundaryPhasePoint x = uniform_phase_point(domain, rng);
        bool bad = false;
        const auto d = commutation_defect(domain, H, x, p, k, bad, opt);
        if (bad) ++nonreg;
        if (!d) continue;
        ++used;
        if (*d < delta) ++hits;
    }
    est.n_used = used;
    est.nonregular_fraction = static_cast<double>(nonreg) / static_cast<double>(n_samples);
    est.excluded_fraction = static_cast<double>(n_samples - used) / static_cast<double>(n_samples);
    if (est.nonregular_fraction > 0.5) fail(ErrorKind::DegenerateSampling, "more than half of the samples are non-regular");
    if (used > 0) {
        est.fraction = static_cast<double>(hits) / static_cast<double>(used);
        est.stderr_ = std::sqrt(est.fraction * (1.0 - est.fraction) / static_cast<double>(used));
    }
    return est;
}

/// Per-(p, k) estimates over signed p with |p| <= max_p and 1 <= k <= max_k,
/// plus the maximum fraction seen.
struct CommutationSweep {
    std::vector<CommutationEstimate> rows;
    double max_fraction = 0.0;
    int max_p = 0;
};

inline CommutationSweep commutation_sweep(const Domain& domain, const InteriorCurve& H, int max_p, int max_k, double delta,
                                          std::uint64_t n_samples, std::uint64_t seed, const DynamicsOptions& opt = {}) {
    CommutationSweep sw;
    sw.max_p = max_p;
    for (int k = 1; k <= max_k; ++k) {
        for (int p = -max_p; p <= max_p; ++p) {
            if (p == 0) continue;
            auto est = commutation_fraction(domain, H, p, k, delta, n_samples, seed, opt);
            sw.max_fraction = std::max(sw.max_fraction, est.fraction);
            sw.rows.push_back(est);
        }
    }
    return sw;
}

// ---------------------------------------------------------------------------
// Birkhoff averages

struct BirkhoffResult {
    std::vector<double> running;  // running[K-1] = (1/K) sum_{k<K} b(beta^k p0)
    int truncated_at = -1;        // first non-regular iterate, -1 if none
};

inline BirkhoffResult birkhoff_average(const Domain& domain, const std::function<double(const BoundaryPhasePoint&)>& b,
                                       const BoundaryPhasePoint& p0, int k_max, const DynamicsOptions& opt = {}) {
    BirkhoffResult res;
    res.running.reserve(static_cast<std::size_t>(k_max));
    BoundaryPhasePoint cur = p0;
    double sum = 0.0;
    for (int K = 1; K <= k_max; ++K) {
        sum += b(cur);
        res.running.push_back(sum / K);
        if (K == k_max) break;
        const BoundaryResult nxt = billiard_map(domain, cur, opt);
        if (!nxt.regular()) {
            res.truncated_at = K;
            break;
        }
        cur = nxt.point;
    }
    return res;
}

}  // namespace qerlab
