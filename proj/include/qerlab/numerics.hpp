#pragma once

// Small numerical helpers shared by the geometry, kernel and statistics code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <thread>
#include <utility>
#include <vector>

namespace qerlab {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

struct QuadratureRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

/// Gauss-Legendre rule with n points, nodes computed by Newton iteration on P_n.
inline QuadratureRule gauss_legendre(int n) {
    QuadratureRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        rule.nodes[static_cast<std::size_t>(i)] = -z;
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = z;
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    return rule;
}

inline const QuadratureRule& gl16() {
    static const QuadratureRule rule = gauss_legendre(16);
    return rule;
}

/// Integral of f over [a, b] with the 16-point Gauss-Legendre rule.
template <class F>
double integrate_gl16(F&& f, double a, double b) {
    const auto& r = gl16();
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) sum += r.weights[i] * f(mid + half * r.nodes[i]);
    return half * sum;
}

/// Safeguarded Newton on a bracket [a, b] with f(a) f(b) <= 0.
template <class F, class DF>
double safeguarded_newton(F&& f, DF&& df, double a, double b, double tol = 1e-15, int max_iter = 100) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa > 0.0) {
        std::swap(a, b);
        std::swap(fa, fb);
    }
    // invariant: f(a) < 0 < f(b) (a, b not ordered)
    double x = 0.5 * (a + b);
    for (int it = 0; it < max_iter; ++it) {
        const double fx = f(x);
        if (fx == 0.0) return x;
        if (fx < 0.0) a = x; else b = x;
        const double d = df(x);
        double next = (d != 0.0) ? x - fx / d : 0.5 * (a + b);
        const double lo = std::min(a, b), hi = std::max(a, b);
        if (!(next > lo && next < hi)) next = 0.5 * (a + b);
        if (std::abs(next - x) <= tol * std::max(1.0, std::abs(x))) return next;
        x = next;
    }
    return x;
}

/// SplitMix64 step, used to derive independent per-sample seeds from a base seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t sample_seed(std::uint64_t base, std::uint64_t index) {
    return splitmix64(splitmix64(base) ^ (index * 0xD1B54A32D192ED03ULL));
}

/// Least-squares slope of y against x.
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = std::min(x.size(), y.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

/// Slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    return fit_slope(lx, ly);
}

/// Halton radical inverse in the given base, for quasi-random point sets.
inline double radical_inverse(std::uint64_t i, unsigned base) {
    double f = 1.0, r = 0.0;
    while (i > 0) {
        f /= base;
        r += f * static_cast<double>(i % base);
        i /= base;
    }
    return r;
}

/// Runs body(i) for i in [0, n) on up to `threads` threads, in contiguous blocks.
template <class F>
void parallel_for(std::size_t n, int threads, F&& body) {
    const std::size_t t = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
    if (t <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < t; ++k) {
        pool.emplace_back([&, k] {
            for (std::size_t i = k * n / t; i < (k + 1) * n / t; ++i) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace qerlab
