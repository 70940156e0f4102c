#pragma once

// Invariant suites behind `qerlab diag`: billiard oracles, Bessel identities,
// the disc counting function, quantization properties and the Monte-Carlo
// pushforward against tensor-grid quadrature.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <gsl/gsl_sf_bessel.h>

#include "qerlab/billiard.hpp"
#include "qerlab/geometry.hpp"
#include "qerlab/numerics.hpp"
#include "qerlab/semiclassics.hpp"
#include "qerlab/special.hpp"
#include "qerlab/spectrum.hpp"

namespace qerlab {

struct DiagCheck {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
    bool informational = false;  // reported, but not part of the pass/fail verdict
};

inline bool all_pass(const std::vector<DiagCheck>& checks) {
    for (const auto& c : checks)
        if (!c.informational && !c.pass) return false;
    return true;
}

namespace diag {

/// Max phase-space distance between the disc billiard map and
/// (y + 2 arccos(eta), eta) over n random regular samples.
inline DiagCheck circle_oracle(int n, std::uint64_t seed) {
    DiagCheck c{"circle_billiard_max_error", 0.0, 1e-9};
    const Domain disc = Domain::disc(1.0);
    int skipped = 0;
    for (int i = 0; i < n; ++i) {
        std::mt19937_64 rng(sample_seed(seed, static_cast<std::uint64_t>(i)));
        const BoundaryPhasePoint p = uniform_phase_point(disc, rng);
        const auto r = billiard_map(disc, p);
        if (!r.regular()) {
            ++skipped;
            continue;
        }
        const BoundaryPhasePoint expect{disc.wrap(p.y + 2.0 * std::acos(p.eta)), p.eta};
        c.value = std::max(c.value, phase_distance(disc, r.point, expect));
    }
    c.pass = c.value < c.threshold;
    c.detail = std::to_string(n - skipped) + " regular samples";
    return c;
}

/// Central-difference Jacobian determinant of the billiard map at (y, eta), or
/// NaN if any evaluation is non-regular or lands near an arc junction.
inline double billiard_jacobian(const Domain& d, const BoundaryPhasePoint& p, double h = 1e-6) {
    auto eval = [&](double y, double eta, BoundaryPhasePoint& out) {
        const auto r = billiard_map(d, {d.wrap(y), eta});
        if (!r.regular() || d.corner_distance(r.point.y) < 1e-4) return false;
        out = r.point;
        return true;
    };
    if (d.corner_distance(p.y) < 1e-4 || std::abs(p.eta) > 1.0 - 1e-3) return std::numeric_limits<double>::quiet_NaN();
    BoundaryPhasePoint c, yp, ym, ep, em;
    if (!eval(p.y, p.eta, c) || !eval(p.y + h, p.eta, yp) || !eval(p.y - h, p.eta, ym) || !eval(p.y, p.eta + h, ep) ||
        !eval(p.y, p.eta - h, em))
        return std::numeric_limits<double>::quiet_NaN();
    auto dy = [&](double a, double b) { return std::remainder(a - b, d.perimeter()); };
    const double a11 = dy(yp.y, ym.y) / (2 * h), a12 = dy(ep.y, em.y) / (2 * h);
    const double a21 = (yp.eta - ym.eta) / (2 * h), a22 = (ep.eta - em.eta) / (2 * h);
    return a11 * a22 - a12 * a21;
}

inline DiagCheck stadium_jacobian(int n, std::uint64_t seed) {
    DiagCheck c{"stadium_jacobian_max_deviation", 0.0, 1e-4};
    const Domain st = Domain::stadium(1.0, 1.0);
    int used = 0;
    for (std::uint64_t i = 0; used < n && i < static_cast<std::uint64_t>(20 * n); ++i) {
        std::mt19937_64 rng(sample_seed(seed, i));
        const double det = billiard_jacobian(st, uniform_phase_point(st, rng));
        if (std::isnan(det)) continue;
        ++used;
        c.value = std::max(c.value, std::abs(det - 1.0));
    }
    c.pass = used == n && c.value < c.threshold;
    c.detail = std::to_string(used) + " regular points";
    return c;
}

/// max |J_n Y_{n+1} - J_{n+1} Y_n + 2 / (pi x)| / (2 / (pi x)) for n = 0..2 at
/// n log-spaced points in [1e-3, 1e3], for GSL and for the fast kernel path.
inline DiagCheck wronskian(int n) {
    DiagCheck c{"wronskian_max_relative", 0.0, 1e-11};
    double fast_err = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = std::pow(10.0, -3.0 + 6.0 * i / (n - 1));
        const double ref = -2.0 / (pi * x);
        for (int m = 0; m <= 2; ++m) {
            const double w = special::bessel_jn(m, x) * special::bessel_yn(m + 1, x) -
                             special::bessel_jn(m + 1, x) * special::bessel_yn(m, x);
            c.value = std::max(c.value, std::abs(w - ref) / std::abs(ref));
        }
        const auto h = special::fast_hankel01(x);
        const double wf = h.h0.real() * h.h1.imag() - h.h1.real() * h.h0.imag();
        fast_err = std::max(fast_err, std::abs(wf - ref) / std::abs(ref));
    }
    c.value = std::max(c.value, fast_err);
    c.pass = c.value < c.threshold;
    c.detail = "fast kernel path " + std::to_string(fast_err);
    return c;
}

/// Disc Dirichlet zeros j_{m,k} < lambda_max with multiplicity, from GSL.
inline std::vector<double> disc_dirichlet_levels(double lambda_max) {
    std::vector<double> out;
    for (int m = 0;; ++m) {
        if (gsl_sf_bessel_zero_Jnu(m, 1) >= lambda_max) break;
        for (unsigned k = 1;; ++k) {
            const double z = gsl_sf_bessel_zero_Jnu(m, k);
            if (z >= lambda_max) break;
            out.push_back(z);
            if (m > 0) out.push_back(z);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// sup |N(lambda) - two-term Weyl(lambda)| over the left and right limits of N
/// at every level of a sorted spectrum.
inline double weyl_residual_sup(const Domain& d, BoundaryCondition bc, const std::vector<double>& levels) {
    double r = 0.0;
    for (double l : levels) {
        const double tol = 1e-9 * std::max(1.0, l);
        const auto left = std::lower_bound(levels.begin(), levels.end(), l - tol) - levels.begin();
        const auto right = std::upper_bound(levels.begin(), levels.end(), l + tol) - levels.begin();
        const double w = weyl_count(d, bc, l);
        r = std::max({r, std::abs(static_cast<double>(left) - w), std::abs(static_cast<double>(right) - w)});
    }
    return r;
}

/// Scanned disc Dirichlet spectrum up to lambda_max against the Bessel zeros;
/// also the two-term Weyl residual bound on the window.
inline std::vector<DiagCheck> disc_counting(double lambda_max, int threads) {
    const Domain disc = Domain::disc(1.0);
    ScanOptions opt;
    opt.threads = threads;
    const auto rep = spectrum_scan(disc, BoundaryCondition::dirichlet, 0.0, lambda_max, opt);
    const auto ref = disc_dirichlet_levels(lambda_max);
    DiagCheck count{"disc_dirichlet_count_mismatch", 0.0, 0.5};
    DiagCheck match{"disc_dirichlet_max_level_error", 0.0, 1e-4};
    count.value = std::abs(static_cast<double>(rep.modes.size()) - static_cast<double>(ref.size()));
    count.pass = count.value < count.threshold;
    count.detail = std::to_string(rep.modes.size()) + " scanned vs " + std::to_string(ref.size()) + " Bessel zeros below " +
                   std::to_string(lambda_max);
    if (rep.modes.size() == ref.size()) {
        for (std::size_t i = 0; i < ref.size(); ++i) match.value = std::max(match.value, std::abs(rep.modes[i].lambda - ref[i]));
    } else {
        match.value = std::numeric_limits<double>::infinity();
    }
    match.pass = match.value < match.threshold;
    DiagCheck weyl{"disc_weyl_two_term_residual", 0.0, 2.0};
    std::vector<double> got;
    for (const auto& m : rep.modes) got.push_back(m.lambda);
    weyl.value = weyl_residual_sup(disc, BoundaryCondition::dirichlet, got);
    weyl.informational = true;
    weyl.detail = "Bessel-zero counting function gives " + std::to_string(weyl_residual_sup(disc, BoundaryCondition::dirichlet, ref));
    weyl.pass = weyl.value <= weyl.threshold;
    return {count, match, weyl};
}

/// Quantization on a closed grid: a = 1 is the identity, a = a(s) is exact
/// multiplication, a = tau diagonalizes on exponentials.
inline std::vector<DiagCheck> quantization_exactness() {
    const InteriorCurve H = InteriorCurve::circle({0.0, 0.0}, 1.0);
    const double lambda = 10.0;
    const CurveGrid g = make_curve_grid(H, 128);
    std::vector<cplx> f(128);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    // random band-limited f with |tau| <= 0.8
    std::vector<cplx> c(128, 0.0);
    for (int k = -8; k <= 8; ++k) c[(k + 128) % 128] = {nd(rng), nd(rng)};
    f = fft_inverse(c);
    DiagCheck id{"quantize_identity_max_error", 0.0, 1e-12};
    const auto o1 = quantize(Symbol::one(), lambda, f, g);
    double fmax = 0.0;
    for (const auto& v : f) fmax = std::max(fmax, std::abs(v));
    for (int j = 0; j < 128; ++j) id.value = std::max(id.value, std::abs(o1[j] - f[j]) / fmax);
    id.pass = id.value < id.threshold;
    DiagCheck mul{"quantize_multiplication_max_error", 0.0, 1e-12};
    const auto as = Symbol::of_s("cos", [](double s) { return 1.0 + 0.5 * std::cos(s); });
    const auto o2 = quantize(as, lambda, f, g);
    for (int j = 0; j < 128; ++j) mul.value = std::max(mul.value, std::abs(o2[j] - (1.0 + 0.5 * std::cos(g.s[j])) * f[j]) / fmax);
    mul.pass = mul.value < mul.threshold;
    DiagCheck tau{"quantize_tau_fourier_max_error", 0.0, 1e-12};
    for (int k : {-5, 1, 3, 7}) {
        std::vector<cplx> e(128);
        for (int j = 0; j < 128; ++j) e[j] = std::polar(1.0, k * g.s[j]);
        const auto o = quantize(Symbol::tau(), lambda, e, g);
        for (int j = 0; j < 128; ++j) tau.value = std::max(tau.value, std::abs(o[j] - (k / lambda) * e[j]));
    }
    tau.pass = tau.value < tau.threshold;
    return {id, mul, tau};
}

/// Dense matrix of the quantized operator on n nodes of period 2 pi.
inline Eigen::MatrixXcd operator_matrix(const Symbol& a, double lambda, int n) {
    Eigen::MatrixXcd m(n, n);
    std::vector<cplx> e(n);
    for (int l = 0; l < n; ++l) {
        std::fill(e.begin(), e.end(), cplx{0.0, 0.0});
        e[l] = 1.0;
        const auto col = detail::kn_apply(a, lambda, e, two_pi);
        for (int j = 0; j < n; ++j) m(j, l) = col[j];
    }
    return m;
}

inline int pow2_at_least(double x) {
    int n = 8;
    while (n < x) n *= 2;
    return n;
}

/// Self-adjointness defect ||Op - Op^*|| and the Garding proxy
/// max(0, -min eig((Op + Op^*)/2)) for real symbols, fitted against lambda.
inline std::vector<DiagCheck> quantization_asymptotics(const std::vector<double>& lambdas = {20.0, 40.0, 80.0}) {
    // concentrated inside |tau| < 1, so the roll-off at the glancing set does not enter
    const Symbol a{"diag_sa", [](double s, double t) {
                       return cplx{(1.0 + 0.5 * std::cos(s) + 0.6 * std::sin(s) * t) * std::exp(-8.0 * t * t), 0.0};
                   }};
    const Symbol b{"diag_garding", [](double s, double t) { return cplx{0.1 + (1.0 + std::cos(s)) * t * t, 0.0}; }};
    std::vector<double> defect, neg;
    for (double l : lambdas) {
        const int n = pow2_at_least(8.0 * l);
        const Eigen::MatrixXcd A = operator_matrix(a, l, n);
        const Eigen::MatrixXcd D = cplx{0.0, 1.0} * (A - A.adjoint());  // Hermitian
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(D, Eigen::EigenvaluesOnly);
        defect.push_back(es.eigenvalues().cwiseAbs().maxCoeff());
        const Eigen::MatrixXcd B = operator_matrix(b, l, n);
        const Eigen::MatrixXcd S = 0.5 * (B + B.adjoint());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es2(S, Eigen::EigenvaluesOnly);
        neg.push_back(std::max(0.0, -es2.eigenvalues().minCoeff()));
    }
    DiagCheck sa{"selfadjoint_decay_exponent", -loglog_slope(lambdas, defect), 0.8};
    sa.pass = sa.value >= sa.threshold;
    sa.detail = "defects";
    for (double d : defect) sa.detail += " " + std::to_string(d);
    DiagCheck ga{"garding_decay_exponent", 0.0, 0.8};
    if (std::all_of(neg.begin(), neg.end(), [](double v) { return v < 1e-14; })) {
        ga.value = std::numeric_limits<double>::infinity();
        ga.detail = "no negative eigenvalues";
    } else {
        std::vector<double> x, y;
        for (std::size_t i = 0; i < neg.size(); ++i)
            if (neg[i] > 1e-14) {
                x.push_back(lambdas[i]);
                y.push_back(neg[i]);
            }
        ga.value = x.size() >= 2 ? -loglog_slope(x, y) : std::numeric_limits<double>::infinity();
        ga.detail = "negative parts";
        for (double d : neg) ga.detail += " " + std::to_string(d);
    }
    ga.pass = ga.value >= ga.threshold;
    return {sa, ga};
}

/// Monte-Carlo pushforward against the tensor-grid quadrature on five
/// builtin (domain, curve, symbol) cases: max |MC - quad| / combined error.
inline DiagCheck pushforward_agreement(std::uint64_t n_samples, std::uint64_t seed, int threads) {
    struct Case {
        Domain d;
        InteriorCurve H;
        Symbol a;
        BoundaryCondition bc;
        DataKind data;
    };
    const Domain disc = Domain::disc(1.0), st = Domain::stadium(1.0, 1.0);
    const auto circle = InteriorCurve::circle({0.0, 0.0}, 0.5);
    const auto mid = InteriorCurve::segment({0.0, -0.9}, {0.0, 0.9});
    const auto tilt = InteriorCurve::segment({-1.5, -0.45}, {1.3, 0.6});
    std::vector<Case> cases{
        {disc, circle, Symbol::one(), BoundaryCondition::neumann, DataKind::dirichlet_data},
        {disc, circle, Symbol::of_tau("tau^2", [](double t) { return t * t; }), BoundaryCondition::dirichlet, DataKind::neumann_data},
        {st, mid, Symbol::one(), BoundaryCondition::neumann, DataKind::dirichlet_data},
        {st, tilt, Symbol::gaussian_bump(1.5, 0.2), BoundaryCondition::neumann, DataKind::dirichlet_data},
        {st, circle, Symbol{"1+tau", [](double, double t) { return cplx{1.0 + t, 0.0}; }}, BoundaryCondition::dirichlet,
         DataKind::dirichlet_data},
    };
    DiagCheck c{"pushforward_mc_vs_quadrature_max_sigma", 0.0, 3.0};
    for (const auto& k : cases) {
        const auto mc = predicted_limit(k.d, k.H, k.a, k.bc, k.data, n_samples, seed, LimitConvention::transfer, threads);
        double qerr = 0.0;
        const double q = predicted_limit_quadrature(k.d, k.H, k.a, k.bc, k.data, 256, &qerr, threads);
        const double comb = std::sqrt(mc.stderr_ * mc.stderr_ + qerr * qerr);
        const double z = std::abs(mc.value - q) / comb;
        c.value = std::max(c.value, z);
        c.detail += (c.detail.empty() ? "" : "; ") + std::to_string(mc.value) + " vs " + std::to_string(q);
    }
    c.pass = c.value <= c.threshold;
    return c;
}

}  // namespace diag

struct DiagOptions {
    std::uint64_t seed = 1;
    int threads = 1;
    std::uint64_t mc_samples = 100000;
    double weyl_lambda_max = 20.0;
};

/// All invariant suites, each timed.
inline std::vector<DiagCheck> run_diagnostics(const DiagOptions& opt = {}) {
    std::vector<DiagCheck> out;
    auto timed = [&](auto&& f) {
        const auto t0 = std::chrono::steady_clock::now();
        auto checks = f();
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        for (auto& c : checks) {
            c.seconds = sec / static_cast<double>(checks.size());
            out.push_back(c);
        }
    };
    timed([&] { return std::vector<DiagCheck>{diag::circle_oracle(10000, opt.seed)}; });
    timed([&] { return std::vector<DiagCheck>{diag::stadium_jacobian(1000, opt.seed)}; });
    timed([&] { return std::vector<DiagCheck>{diag::wronskian(1000)}; });
    timed([&] { return diag::disc_counting(opt.weyl_lambda_max, opt.threads); });
    timed([&] { return diag::quantization_exactness(); });
    timed([&] { return diag::quantization_asymptotics(); });
    timed([&] { return std::vector<DiagCheck>{diag::pushforward_agreement(opt.mc_samples, opt.seed, opt.threads)}; });
    return out;
}

}  // namespace qerlab
