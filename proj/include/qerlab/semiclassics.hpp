#pragma once

// Symbols, quantization on curves, restriction matrix elements, their
// predicted quantum limits, and the statistics built on them.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qerlab/billiard.hpp"
#include "qerlab/eigenmode.hpp"
#include "qerlab/errors.hpp"
#include "qerlab/fourier.hpp"
#include "qerlab/geometry.hpp"
#include "qerlab/numerics.hpp"

namespace qerlab {

// ---------------------------------------------------------------------------
// Symbols

/// C-infinity step: 0 for x <= 0, 1 for x >= 1.
inline double smooth_step(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / x), b = std::exp(-1.0 / (1.0 - x));
    return a / (a + b);
}

inline constexpr double rolloff_width = 0.2;

/// Frequency roll-off: 1 on |tau| <= 1, 0 beyond 1 + rolloff_width.
inline double tau_rolloff(double tau) { return 1.0 - smooth_step((std::abs(tau) - 1.0) / rolloff_width); }

/// Zeroth-order symbol a(s, tau) on T*H.
struct Symbol {
    std::string kind = "one";
    std::function<cplx(double, double)> fn;
    bool s_only = false;     // a depends on s alone: a multiplication operator
    bool tau_only = false;   // a depends on tau alone: a Fourier multiplier
    std::optional<std::array<double, 2>> s_support;  // declared support in s; whole curve if empty
    double sup_norm = 1.0;

    cplx operator()(double s, double tau) const {
        if (s_support && (s < (*s_support)[0] || s > (*s_support)[1])) return {0.0, 0.0};
        return fn(s, tau);
    }

    static Symbol one() {
        Symbol a;
        a.fn = [](double, double) { return cplx{1.0, 0.0}; };
        a.s_only = a.tau_only = true;
        return a;
    }
    static Symbol zero() {
        Symbol a;
        a.kind = "zero";
        a.fn = [](double, double) { return cplx{0.0, 0.0}; };
        a.s_only = a.tau_only = true;
        a.sup_norm = 0.0;
        return a;
    }
    static Symbol tau() {
        Symbol a;
        a.kind = "tau";
        a.fn = [](double, double t) { return cplx{t, 0.0}; };
        a.tau_only = true;
        return a;
    }
    static Symbol of_s(std::string name, std::function<double(double)> f, double sup = 1.0) {
        Symbol a;
        a.kind = std::move(name);
        a.fn = [f = std::move(f)](double s, double) { return cplx{f(s), 0.0}; };
        a.s_only = true;
        a.sup_norm = sup;
        return a;
    }
    static Symbol of_tau(std::string name, std::function<double(double)> f, double sup = 1.0) {
        Symbol a;
        a.kind = std::move(name);
        a.fn = [f = std::move(f)](double, double t) { return cplx{f(t), 0.0}; };
        a.tau_only = true;
        a.sup_norm = sup;
        return a;
    }
    /// exp(-ds^2 / 2 w^2) exp(-(tau - tau0)^2 / 2 w_tau^2), cut off at |ds| = 4w.
    /// An infinite tau width gives a function of s alone. `period` > 0 measures
    /// ds periodically (closed curves).
    static Symbol gaussian_bump(double s0, double width, double tau0 = 0.0,
                                double tau_width = std::numeric_limits<double>::infinity(), double period = 0.0) {
        if (!(width > 0.0) || !(tau_width > 0.0)) fail(ErrorKind::InvalidArgument, "bump widths must be positive");
        Symbol a;
        a.kind = "gaussian_bump";
        const bool s_only = std::isinf(tau_width);
        a.fn = [=](double s, double t) {
            double ds = s - s0;
            if (period > 0.0) ds = std::remainder(ds, period);
            if (std::abs(ds) > 4.0 * width) return cplx{0.0, 0.0};
            double v = std::exp(-ds * ds / (2.0 * width * width));
            if (!s_only) v *= std::exp(-(t - tau0) * (t - tau0) / (2.0 * tau_width * tau_width));
            return cplx{v, 0.0};
        };
        a.s_only = s_only;
        if (period <= 0.0) a.s_support = std::array<double, 2>{s0 - 4.0 * width, s0 + 4.0 * width};
        return a;
    }
    /// chi_eps(tau): 0 for |tau| <= 1 - eps, 1 for |tau| >= 1 - eps / 2.
    static Symbol tangential_cutoff(double eps) {
        if (!(eps > 0.0)) fail(ErrorKind::InvalidArgument, "epsilon must be positive");
        return of_tau("tangential_cutoff", [eps](double t) { return smooth_step((std::abs(t) - (1.0 - eps)) / (0.5 * eps)); });
    }

    /// a(s, tau) w(tau).
    Symbol times_tau(std::function<double(double)> w, const std::string& name) const {
        Symbol b = *this;
        b.kind = kind + "*" + name;
        b.fn = [f = fn, w = std::move(w)](double s, double t) { return f(s, t) * w(t); };
        b.s_only = false;
        return b;
    }
    Symbol conjugated() const {
        Symbol b = *this;
        b.fn = [f = fn](double s, double t) { return std::conj(f(s, t)); };
        return b;
    }
};

inline double one_minus_tau2(double t) { return 1.0 - t * t; }

// ---------------------------------------------------------------------------
// Quantization

namespace detail {

/// Kohn-Nirenberg operator on N samples of a function with period L:
/// (Op f)(s_j) = sum_k e^{2 pi i k s_j / L} a(s_j, tau_k) rho(tau_k) f^(k),
/// tau_k = 2 pi k / (lambda L), rho the roll-off. Multiplication operators
/// are applied exactly.
inline std::vector<cplx> kn_apply(const Symbol& a, double lambda, const std::vector<cplx>& f, double L, double s0 = 0.0) {
    const int n = static_cast<int>(f.size());
    std::vector<cplx> out(f.size());
    const double h = L / n;
    if (a.s_only) {
        for (int j = 0; j < n; ++j) out[j] = a(s0 + h * j, 0.0) * f[j];
        return out;
    }
    auto c = fft_forward(f);
    for (auto& v : c) v /= static_cast<double>(n);
    std::vector<double> tau(n);
    for (int k = 0; k < n; ++k) tau[k] = two_pi * dft_frequency(k, n) / (lambda * L);
    if (a.tau_only) {
        for (int k = 0; k < n; ++k) c[k] *= a(s0, tau[k]) * tau_rolloff(tau[k]) * static_cast<double>(n);
        return fft_inverse(c);
    }
    // roots of unity table: e^{2 pi i m / n}
    std::vector<cplx> root(n);
    for (int m = 0; m < n; ++m) root[m] = std::polar(1.0, two_pi * m / n);
    std::vector<int> active;
    for (int k = 0; k < n; ++k)
        if (tau_rolloff(tau[k]) > 0.0 && c[k] != cplx{0.0, 0.0}) active.push_back(k);
    for (int j = 0; j < n; ++j) {
        const double s = s0 + h * j;
        cplx sum{0.0, 0.0};
        for (int k : active) {
            const cplx av = a(s, tau[k]);
            if (av == cplx{0.0, 0.0}) continue;
            const int m = static_cast<int>((static_cast<long long>(j) * k) % n);
            sum += root[m] * av * tau_rolloff(tau[k]) * c[k];
        }
        out[j] = sum;
    }
    return out;
}

}  // namespace detail

/// Op_lambda(a) f on a closed curve grid; the grid size must be a power of two
/// with at least 8 lambda L / 2 pi nodes.
inline std::vector<cplx> quantize(const Symbol& a, double lambda, const std::vector<cplx>& f, const CurveGrid& g) {
    if (!g.closed) fail(ErrorKind::OpenCurve, "quantize needs a closed curve; use quantize_windowed");
    const int n = g.size();
    if (static_cast<int>(f.size()) != n) fail(ErrorKind::InvalidArgument, "sample count does not match the grid");
    if ((n & (n - 1)) != 0) fail(ErrorKind::InvalidArgument, "closed-curve grid size must be a power of two");
    if (n < 8.0 * lambda * g.length / two_pi)
        fail(ErrorKind::UnderResolved, "grid of " + std::to_string(n) + " nodes does not resolve B*H at lambda=" +
                                           std::to_string(lambda));
    return detail::kn_apply(a, lambda, f, g.length);
}

/// Support of a symbol on an open curve, checked against the endpoint clearance.
inline std::array<double, 2> windowed_support(const Symbol& a, double lambda, const CurveGrid& g) {
    const double wl = two_pi / lambda;
    const std::array<double, 2> sup = a.s_support.value_or(std::array<double, 2>{0.0, g.length});
    if (sup[0] < 5.0 * wl || sup[1] > g.length - 5.0 * wl)
        fail(ErrorKind::SupportTooCloseToEndpoint,
             "symbol support [" + std::to_string(sup[0]) + ", " + std::to_string(sup[1]) +
                 "] is within 5 wavelengths of an endpoint of a curve of length " + std::to_string(g.length));
    return sup;
}

/// Op_lambda(a) f on an open curve: f is cut off by a smooth window that is 1
/// within 2.5 wavelengths of the symbol support, periodized, quantized and
/// restricted to the support (zero elsewhere).
inline std::vector<cplx> quantize_windowed(const Symbol& a, double lambda, const std::vector<cplx>& f, const CurveGrid& g) {
    if (g.closed) return quantize(a, lambda, f, g);
    if (static_cast<int>(f.size()) != g.size()) fail(ErrorKind::InvalidArgument, "sample count does not match the grid");
    const auto sup = windowed_support(a, lambda, g);
    const double m = 2.5 * two_pi / lambda;
    const int n = g.size() - 1;  // periodic grid drops the last endpoint
    std::vector<cplx> wf(n);
    for (int j = 0; j < n; ++j) {
        const double s = g.s[j];
        const double w = smooth_step((s - (sup[0] - 2.0 * m)) / m) * smooth_step(((sup[1] + 2.0 * m) - s) / m);
        wf[j] = w * f[j];
    }
    auto out = detail::kn_apply(a, lambda, wf, g.length);
    out.push_back({0.0, 0.0});
    for (int j = 0; j <= n; ++j)
        if (g.s[j] < sup[0] || g.s[j] > sup[1]) out[j] = {0.0, 0.0};
    return out;
}

/// <Op_lambda(a) g, g>_{L^2(H)} by grid quadrature. Functions of s alone are
/// integrated directly; other symbols need a closed curve or a support clear
/// of the endpoints.
inline cplx matrix_element(const std::vector<cplx>& g, const CurveGrid& grid, double lambda, const Symbol& a) {
    if (static_cast<int>(g.size()) != grid.size()) fail(ErrorKind::InvalidArgument, "sample count does not match the grid");
    cplx sum{0.0, 0.0};
    if (a.s_only) {
        for (int j = 0; j < grid.size(); ++j) sum += grid.w[j] * a(grid.s[j], 0.0) * std::norm(g[j]);
        return sum;
    }
    const auto og = grid.closed ? quantize(a, lambda, g, grid) : quantize_windowed(a, lambda, g, grid);
    for (int j = 0; j < grid.size(); ++j) sum += grid.w[j] * og[j] * std::conj(g[j]);
    return sum;
}

/// <Op((1 - tau^2) a) u^H, u^H> + <Op(a) u^{H,nu}, u^{H,nu}>. On open curves
/// with a = a(s) the first term is the symmetric form
/// int a (|u^H|^2 - |lambda^{-1} d_s u|^2), the same operator up to O(1/lambda)
/// without a window.
inline cplx cauchy_matrix_element(const CurveRestriction& r, const CurveGrid& grid, const Symbol& a) {
    if (!grid.closed && a.s_only) {
        cplx sum{0.0, 0.0};
        for (int j = 0; j < grid.size(); ++j)
            sum += grid.w[j] * a(grid.s[j], 0.0) *
                   (std::norm(r.value[j]) - std::norm(r.tangential[j]) + std::norm(r.normal[j]));
        return sum;
    }
    return matrix_element(r.value, grid, r.lambda, a.times_tau(one_minus_tau2, "(1-tau^2)")) +
           matrix_element(r.normal, grid, r.lambda, a);
}

// ---------------------------------------------------------------------------
// Predicted limits

enum class DataKind { dirichlet_data, neumann_data };

inline const char* data_name(DataKind d) { return d == DataKind::dirichlet_data ? "dirichlet_data" : "neumann_data"; }

/// How the limit density on B*H is formed.
///  transfer: c_2 (tau_boundary^H)_*(gamma^{-+1} dy deta) with the boundary-side
///    weight (gamma^{-1} for Neumann, gamma for Dirichlet modes).
///  local_weyl: the interior local Weyl law restricted to H,
///    (1 / (pi area)) gamma_H^{-1} ds dtau, independent of the boundary condition.
enum class LimitConvention { transfer, local_weyl };

inline const char* convention_name(LimitConvention c) { return c == LimitConvention::transfer ? "transfer" : "local_weyl"; }

/// c_2 = 4 / (vol(S^1) area).
inline double c2_constant(const Domain& d) { return 2.0 / (pi * d.area()); }

struct LimitMeasureEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::uint64_t n_samples = 0;
    std::vector<std::uint64_t> branch_counts;  // regular crossings by branch index
    std::string weight_convention;             // "gamma^-1" (Neumann) or "gamma" (Dirichlet)
    double excluded_fraction = 0.0;            // samples with a non-regular crossing
    std::uint64_t seed = 0;
};

/// Crossings of one boundary sample with H and its Monte-Carlo weight
/// (measure factor times the boundary weight gamma^{-+1}).
struct PushforwardSample {
    double weight = 0.0;
    std::vector<CurvePhasePoint> hits;
    bool nonregular = false;
};

/// Samples of (tau_boundary^H)_*(gamma^{-+1} dy deta). For Neumann modes eta = sin(theta)
/// with theta uniform, which absorbs gamma^{-1} into the measure and keeps the
/// variance finite; for Dirichlet modes eta is uniform.
inline std::vector<PushforwardSample> pushforward_samples(const Domain& domain, const InteriorCurve& H, BoundaryCondition bc,
                                                          std::uint64_t n_samples, std::uint64_t seed, int threads = 1) {
    if (n_samples < 1) fail(ErrorKind::InvalidArgument, "n_samples must be >= 1");
    const double P = domain.perimeter();
    std::vector<PushforwardSample> out(n_samples);
    parallel_for(n_samples, threads, [&](std::size_t i) {
        std::mt19937_64 rng(sample_seed(seed, i));
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        BoundaryPhasePoint p;
        p.y = P * u01(rng);
        PushforwardSample& smp = out[i];
        if (bc == BoundaryCondition::neumann) {
            p.eta = std::sin(pi * (u01(rng) - 0.5));
            smp.weight = pi * P;
        } else {
            p.eta = 2.0 * u01(rng) - 1.0;
            smp.weight = 2.0 * P * gamma_factor(p.eta);
        }
        if (!(std::abs(p.eta) < 1.0)) {
            smp.nonregular = true;
            return;
        }
        for (const auto& r : transfer_to_curve(domain, H, p)) {
            if (!r.regular()) {
                smp.nonregular = true;
                continue;
            }
            smp.hits.push_back(r.point);
        }
    });
    return out;
}

/// Monte-Carlo estimate of c_2 int integrand d(pushforward) from precomputed samples.
inline LimitMeasureEstimate pushforward_estimate(const Domain& domain, const std::vector<PushforwardSample>& samples,
                                                 const std::function<double(const CurvePhasePoint&)>& integrand,
                                                 BoundaryCondition bc) {
    LimitMeasureEstimate est;
    est.n_samples = samples.size();
    est.weight_convention = bc == BoundaryCondition::neumann ? "gamma^-1" : "gamma";
    const double c2 = c2_constant(domain);
    double sum = 0.0, sum2 = 0.0;
    std::uint64_t bad = 0;
    for (const auto& smp : samples) {
        if (smp.nonregular) ++bad;
        double v = 0.0;
        for (std::size_t b = 0; b < smp.hits.size(); ++b) {
            if (est.branch_counts.size() <= b) est.branch_counts.resize(b + 1, 0);
            ++est.branch_counts[b];
            v += integrand(smp.hits[b]);
        }
        v *= smp.weight * c2;
        sum += v;
        sum2 += v * v;
    }
    const double n = static_cast<double>(samples.size());
    est.excluded_fraction = static_cast<double>(bad) / n;
    if (est.excluded_fraction > 0.5) fail(ErrorKind::DegenerateSampling, "more than half of the samples are non-regular");
    est.value = sum / n;
    est.stderr_ = n > 1 ? std::sqrt(std::max(0.0, (sum2 / n - est.value * est.value) / (n - 1.0))) : 0.0;
    return est;
}

namespace detail {

/// int_0^L ds int_{-pi/2}^{pi/2} f(s, sin theta) dtheta by composite Gauss-Legendre.
inline double curve_theta_integral(const InteriorCurve& H, const std::function<double(double, double)>& f, int s_panels = 128,
                                   int theta_panels = 32) {
    const double L = H.length();
    double total = 0.0;
    for (int i = 0; i < s_panels; ++i) {
        total += integrate_gl16(
            [&](double s) {
                double inner = 0.0;
                for (int k = 0; k < theta_panels; ++k)
                    inner += integrate_gl16([&](double th) { return f(s, std::sin(th)); }, -0.5 * pi + pi * k / theta_panels,
                                            -0.5 * pi + pi * (k + 1) / theta_panels);
                return inner;
            },
            L * i / s_panels, L * (i + 1) / s_panels);
    }
    return total;
}

inline double data_factor(DataKind data, double tau) { return data == DataKind::neumann_data ? 1.0 - tau * tau : 1.0; }

}  // namespace detail

/// Predicted limit of <Op(a) g_j, g_j> for Dirichlet data (g = u^H) or
/// Neumann data (g = u^{H,nu}). Uses the real part of a.
inline LimitMeasureEstimate predicted_limit(const Domain& domain, const InteriorCurve& H, const Symbol& a, BoundaryCondition bc,
                                            DataKind data, std::uint64_t n_samples, std::uint64_t seed,
                                            LimitConvention conv = LimitConvention::transfer, int threads = 1) {
    if (conv == LimitConvention::local_weyl) {
        LimitMeasureEstimate est;
        est.weight_convention = "gamma_H^-1";
        est.value = detail::curve_theta_integral(H, [&](double s, double t) {
                        return a(s, t).real() * detail::data_factor(data, t);
                    }) / (pi * domain.area());
        return est;
    }
    const auto samples = pushforward_samples(domain, H, bc, n_samples, seed, threads);
    auto est = pushforward_estimate(domain, samples, [&](const CurvePhasePoint& c) {
        return a(c.s, c.tau).real() * detail::data_factor(data, c.tau);
    }, bc);
    est.seed = seed;
    return est;
}

/// Predicted limit of the Cauchy-data combination: integrand 2 (1 - tau^2) a.
inline LimitMeasureEstimate predicted_cd_limit(const Domain& domain, const InteriorCurve& H, const Symbol& a, BoundaryCondition bc,
                                               std::uint64_t n_samples, std::uint64_t seed,
                                               LimitConvention conv = LimitConvention::transfer, int threads = 1) {
    if (conv == LimitConvention::local_weyl) {
        LimitMeasureEstimate est;
        est.weight_convention = "gamma_H^-1";
        est.value = detail::curve_theta_integral(H, [&](double s, double t) {
                        return 2.0 * (1.0 - t * t) * a(s, t).real();
                    }) / (pi * domain.area());
        return est;
    }
    const auto samples = pushforward_samples(domain, H, bc, n_samples, seed, threads);
    auto est = pushforward_estimate(domain, samples, [&](const CurvePhasePoint& c) {
        return 2.0 * (1.0 - c.tau * c.tau) * a(c.s, c.tau).real();
    }, bc);
    est.seed = seed;
    return est;
}

/// Deterministic tensor-grid version of the transfer-convention limit:
/// midpoint rule in (y, theta) with eta = sin(theta) for Neumann modes and in
/// (y, eta) for Dirichlet modes. `error` receives |Q(n) - Q(n/2)|.
inline double predicted_limit_quadrature(const Domain& domain, const InteriorCurve& H, const Symbol& a, BoundaryCondition bc,
                                         DataKind data, int n = 256, double* error = nullptr, int threads = 1) {
    auto rule = [&](int m) {
        const double P = domain.perimeter();
        std::vector<double> rows(static_cast<std::size_t>(m), 0.0);
        parallel_for(static_cast<std::size_t>(m), threads, [&](std::size_t i) {
            const double y = P * (i + 0.5) / m;
            double acc = 0.0;
            for (int k = 0; k < m; ++k) {
                double eta, w;
                if (bc == BoundaryCondition::neumann) {
                    eta = std::sin(pi * ((k + 0.5) / m - 0.5));
                    w = pi / m;
                } else {
                    eta = 2.0 * (k + 0.5) / m - 1.0;
                    w = 2.0 / m * gamma_factor(eta);
                }
                double v = 0.0;
                for (const auto& r : transfer_to_curve(domain, H, {y, eta}))
                    if (r.regular()) v += a(r.point.s, r.point.tau).real() * detail::data_factor(data, r.point.tau);
                acc += w * v;
            }
            rows[i] = acc * P / m;
        });
        double s = 0.0;
        for (double r : rows) s += r;
        return c2_constant(domain) * s;
    };
    const double q = rule(n);
    if (error) *error = std::abs(q - rule(n / 2));
    return q;
}

/// Local Weyl limit of <Op(a) u^b, u^b> on the boundary itself:
/// c_2 int a gamma^{-+1} dy deta (gamma^{-1} for Neumann, gamma for Dirichlet).
inline double predicted_boundary_limit(const Domain& domain, const std::function<double(double, double)>& a, BoundaryCondition bc) {
    const double P = domain.perimeter();
    const int panels = 64;
    double total = 0.0;
    for (int i = 0; i < panels; ++i) {
        total += integrate_gl16(
            [&](double y) {
                double inner = 0.0;
                for (int k = 0; k < 16; ++k) {
                    const double t0 = -0.5 * pi + pi * k / 16, t1 = -0.5 * pi + pi * (k + 1) / 16;
                    inner += integrate_gl16(
                        [&](double th) {
                            const double eta = std::sin(th), c = std::cos(th);
                            // d eta = cos(theta) d theta; gamma = cos(theta)
                            return bc == BoundaryCondition::neumann ? a(y, eta) : a(y, eta) * c * c;
                        },
                        t0, t1);
                }
                return inner;
            },
            P * i / panels, P * (i + 1) / panels);
    }
    return c2_constant(domain) * total;
}

// ---------------------------------------------------------------------------
// Per-mode records and statistics

struct MatrixElementRecord {
    double lambda = 0.0;
    cplx value_dirichlet_data;
    cplx value_neumann_data;
    cplx value_cauchy;
    double predicted = std::numeric_limits<double>::quiet_NaN();
    BoundaryCondition bc = BoundaryCondition::neumann;
};

inline MatrixElementRecord matrix_element_record(const CurveRestriction& r, const CurveGrid& grid, const Symbol& a,
                                                 BoundaryCondition bc, double predicted) {
    MatrixElementRecord rec;
    rec.lambda = r.lambda;
    rec.bc = bc;
    rec.value_dirichlet_data = matrix_element(r.value, grid, r.lambda, a);
    rec.value_neumann_data = matrix_element(r.normal, grid, r.lambda, a);
    rec.value_cauchy = cauchy_matrix_element(r, grid, a);
    rec.predicted = predicted;
    return rec;
}

/// Two-cluster split of a 1D sample (optimal 2-means).
struct Bimodality {
    double statistic = 0.0;    // (high mean - low mean) / pooled within-cluster sd
    double low_mean = 0.0;
    double high_mean = 0.0;
    double low_fraction = 0.0;
    double pooled_sd = 0.0;
    std::size_t split = 0;     // size of the low cluster
};

inline Bimodality two_means(std::vector<double> v) {
    Bimodality b;
    const std::size_t n = v.size();
    if (n < 2) return b;
    std::sort(v.begin(), v.end());
    std::vector<double> pre(n + 1, 0.0), pre2(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        pre[i + 1] = pre[i] + v[i];
        pre2[i + 1] = pre2[i] + v[i] * v[i];
    }
    auto sse = [&](std::size_t a, std::size_t e) {
        const double m = static_cast<double>(e - a);
        const double s = pre[e] - pre[a];
        return std::max(0.0, pre2[e] - pre2[a] - s * s / m);
    };
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < n; ++k) {
        const double c = sse(0, k) + sse(k, n);
        if (c < best) {
            best = c;
            b.split = k;
        }
    }
    const std::size_t k = b.split;
    b.low_mean = pre[k] / static_cast<double>(k);
    b.high_mean = (pre[n] - pre[k]) / static_cast<double>(n - k);
    b.low_fraction = static_cast<double>(k) / static_cast<double>(n);
    b.pooled_sd = std::sqrt(best / static_cast<double>(n));
    b.statistic = b.pooled_sd > 0.0 ? (b.high_mean - b.low_mean) / b.pooled_sd : std::numeric_limits<double>::infinity();
    return b;
}

/// (1 / N) sum_{j < N} |v_j - target|^2 over v[from, to).
inline double cesaro_variance(const std::vector<double>& v, double target, std::size_t from = 0,
                              std::size_t to = std::numeric_limits<std::size_t>::max()) {
    to = std::min(to, v.size());
    if (to <= from) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (std::size_t j = from; j < to; ++j) s += (v[j] - target) * (v[j] - target);
    return s / static_cast<double>(to - from);
}

inline double mean_of(const std::vector<double>& v, std::size_t from = 0, std::size_t to = std::numeric_limits<std::size_t>::max()) {
    to = std::min(to, v.size());
    if (to <= from) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (std::size_t j = from; j < to; ++j) s += v[j];
    return s / static_cast<double>(to - from);
}

struct QERReport {
    std::vector<MatrixElementRecord> records;  // sorted by lambda
    DataKind data = DataKind::dirichlet_data;
    double predicted = 0.0;
    std::vector<double> values;            // real parts of the chosen data's matrix elements
    std::vector<double> running_mean;      // running_mean[N-1] over the first N modes
    std::vector<double> cesaro;            // cesaro[N-1] = V over the first N modes
    Bimodality bimodality;
    bool enough_modes = false;             // at least 20 modes
};

inline double record_value(const MatrixElementRecord& r, DataKind data) {
    return data == DataKind::dirichlet_data ? r.value_dirichlet_data.real() : r.value_neumann_data.real();
}

inline QERReport qer_report(std::vector<MatrixElementRecord> records, DataKind data, double predicted) {
    QERReport rep;
    std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.lambda < b.lambda; });
    rep.records = std::move(records);
    rep.data = data;
    rep.predicted = predicted;
    rep.enough_modes = rep.records.size() >= 20;
    double s = 0.0, v = 0.0;
    for (std::size_t j = 0; j < rep.records.size(); ++j) {
        const double x = record_value(rep.records[j], data);
        rep.values.push_back(x);
        s += x;
        v += (x - predicted) * (x - predicted);
        rep.running_mean.push_back(s / static_cast<double>(j + 1));
        rep.cesaro.push_back(v / static_cast<double>(j + 1));
    }
    rep.bimodality = two_means(rep.values);
    return rep;
}

struct WeylRow {
    double lambda;
    std::size_t n;
    double running_avg;
    double target;
};

/// Running averages (1 / N(lambda)) sum_{lambda_j <= lambda} v_j against a target.
inline std::vector<WeylRow> weyl_average(const std::vector<double>& lambdas, const std::vector<double>& values, double target) {
    std::vector<std::size_t> idx(lambdas.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return lambdas[a] < lambdas[b]; });
    std::vector<WeylRow> rows;
    double s = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        s += values[idx[k]];
        rows.push_back({lambdas[idx[k]], k + 1, s / static_cast<double>(k + 1), target});
    }
    return rows;
}

/// Boundary trace resampled on n uniform arc-length points, for quantization on the boundary.
inline std::vector<cplx> uniform_boundary_samples(const ModeField& field, int n) {
    std::vector<cplx> out(static_cast<std::size_t>(n));
    const double P = field.domain().perimeter();
    for (int j = 0; j < n; ++j) out[j] = field.trace_at(P * j / n);
    return out;
}

/// <Op(a) u^b, u^b> over the boundary for a function a(y) of arc length alone.
inline double boundary_matrix_element(const ModeField& field, const std::function<double(double)>& a) {
    const auto& g = field.grid();
    double s = 0.0;
    for (int j = 0; j < g.size(); ++j) s += g.weight(j) * a(g.y(j)) * std::norm(field.trace()[j]);
    return s;
}

/// ||Op(chi_eps) u^H||^2 on a closed curve.
inline double tangential_mass_one(const std::vector<cplx>& g, const CurveGrid& grid, double lambda, double eps) {
    const auto og = quantize(Symbol::tangential_cutoff(eps), lambda, g, grid);
    double s = 0.0;
    for (int j = 0; j < grid.size(); ++j) s += grid.w[j] * std::norm(og[j]);
    return s;
}

/// Average of ||Op(chi_eps) u_j^H||^2 over a mode set (zero for an empty set).
inline double tangential_mass(const std::vector<CurveRestriction>& modes, const std::vector<CurveGrid>& grids, double eps) {
    if (modes.empty()) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < modes.size(); ++i) s += tangential_mass_one(modes[i].value, grids[i], modes[i].lambda, eps);
    return s / static_cast<double>(modes.size());
}

// ---------------------------------------------------------------------------
// Nodal intersections

struct NodalCount {
    int count = 0;
    std::vector<double> roots;   // arc-length positions of the sign changes
    double max_abs = 0.0;
    double imag_residue = 0.0;
};

/// Sign changes of the real-gauged u^H along C, located by bisection; roots
/// closer than 1e-8 in arc length are merged.
inline NodalCount nodal_intersections(const ModeField& field, const InteriorCurve& C, int threads = 1) {
    require_clearance(field.domain(), C, field.min_clearance());
    const double L = C.length();
    int n = std::max(256, static_cast<int>(std::ceil(40.0 * field.lambda() * L / two_pi)));
    const int samples = C.closed() ? n : n + 1;
    std::vector<cplx> v(static_cast<std::size_t>(samples));
    auto at = [&](double s) { return field.raw(C.point(s), false).value; };
    parallel_for(v.size(), threads, [&](std::size_t j) { v[j] = at(L * static_cast<double>(j) / n); });
    NodalCount out;
    for (const auto& x : v) out.max_abs = std::max(out.max_abs, std::abs(x));
    if (out.max_abs < 1e-8) fail(ErrorKind::ZeroTrace, "restriction vanishes on the curve (max |u^H| < 1e-8)");
    // real gauge: rotate by the principal phase of the samples
    cplx s2{0.0, 0.0};
    for (const auto& x : v) s2 += x * x;
    const cplx gauge = std::polar(1.0, -0.5 * std::arg(s2));
    double im = 0.0;
    for (auto& x : v) {
        x *= gauge;
        im = std::max(im, std::abs(x.imag()));
    }
    out.imag_residue = im / out.max_abs;
    if (out.imag_residue >= 1e-2)
        fail(ErrorKind::InvalidArgument, "restriction is not real up to a phase (residue " + std::to_string(out.imag_residue) + ")");
    auto at_real = [&](double s) { return (at(s) * gauge).real(); };
    for (int j = 0; j < n; ++j) {
        const double fa = v[j].real();
        const double fb = v[(j + 1) % samples].real();
        if ((fa > 0.0) == (fb > 0.0)) continue;
        double a = L * j / n, b = L * (j + 1) / n;
        double ga = fa;
        for (int it = 0; it < 40 && b - a > 1e-12; ++it) {
            const double m = 0.5 * (a + b);
            const double gm = at_real(m);
            if ((gm > 0.0) == (ga > 0.0)) {
                a = m;
                ga = gm;
            } else {
                b = m;
            }
        }
        const double root = 0.5 * (a + b);
        if (!out.roots.empty() && root - out.roots.back() < 1e-8) continue;
        out.roots.push_back(root);
    }
    if (C.closed() && out.roots.size() > 1 && out.roots.front() + L - out.roots.back() < 1e-8) out.roots.pop_back();
    out.count = static_cast<int>(out.roots.size());
    return out;
}

}  // namespace qerlab
