#pragma once

// Cylinder functions for the 2D Helmholtz kernels. The integer-order Bessel
// functions come from GSL; this header wraps them into complex Hankel
// functions of the first kind.

#include <array>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_bessel.h>

namespace qerlab::special {

using cplx = std::complex<double>;

namespace detail {
inline void silence_gsl() {
    static std::once_flag flag;
    std::call_once(flag, [] { gsl_set_error_handler_off(); });
}
}  // namespace detail

inline double bessel_j0(double x) { return gsl_sf_bessel_J0(x); }
inline double bessel_j1(double x) { return gsl_sf_bessel_J1(x); }
inline double bessel_y0(double x) { detail::silence_gsl(); return gsl_sf_bessel_Y0(x); }
inline double bessel_y1(double x) { detail::silence_gsl(); return gsl_sf_bessel_Y1(x); }

inline double bessel_jn(int n, double x) { detail::silence_gsl(); return gsl_sf_bessel_Jn(n, x); }
inline double bessel_yn(int n, double x) { detail::silence_gsl(); return gsl_sf_bessel_Yn(n, x); }

/// H_n^(1)(x) = J_n(x) + i Y_n(x), x > 0.
inline cplx hankel1(int n, double x) {
    if (n == 0) return {bessel_j0(x), bessel_y0(x)};
    if (n == 1) return {bessel_j1(x), bessel_y1(x)};
    return {bessel_jn(n, x), bessel_yn(n, x)};
}

/// H_0^(1)(x) and H_1^(1)(x) together.
struct Hankel01 {
    cplx h0;
    cplx h1;
};

inline Hankel01 hankel01(double x) {
    detail::silence_gsl();
    return {{gsl_sf_bessel_J0(x), gsl_sf_bessel_Y0(x)}, {gsl_sf_bessel_J1(x), gsl_sf_bessel_Y1(x)}};
}

/// H_0 and H_1 for kernel assembly. Above x = 6 the slowly varying envelopes
/// A_n(x) = H_n(x) sqrt(pi x / 2) exp(-i(x - n pi/2 - pi/4)) are interpolated by
/// Chebyshev series in u = 6/x on dyadic panels, built once from GSL values.
/// Below that the GSL routines are called directly.
class FastHankel01 {
public:
    static constexpr double x_switch = 6.0;
    static constexpr int n_panels = 8;
    static constexpr int degree = 22;

    static const FastHankel01& instance() {
        static const FastHankel01 table;
        return table;
    }

    Hankel01 operator()(double x) const {
        if (x < x_switch) return hankel01(x);
        const double u = x_switch / x;
        int p = 0;
        while (p + 1 < n_panels && u < lo_[p]) ++p;
        const double a = lo_[p], b = (p == 0) ? 1.0 : lo_[p - 1];
        const double t = (2.0 * u - a - b) / (b - a);
        std::array<double, 4> b1{}, b2{};
        const auto& c = coef_[p];
        for (int k = degree; k >= 1; --k) {
            for (int q = 0; q < 4; ++q) {
                const double v = 2.0 * t * b1[q] - b2[q] + c[k][q];
                b2[q] = b1[q];
                b1[q] = v;
            }
        }
        std::array<double, 4> env;
        for (int q = 0; q < 4; ++q) env[q] = t * b1[q] - b2[q] + c[0][q];
        const double amp = std::sqrt(2.0 / (std::numbers::pi * x));
        const double cs = std::cos(x), sn = std::sin(x);
        constexpr double r = 0.70710678118654752440;
        // exp(i(x - pi/4)) and exp(i(x - 3 pi/4)) = -i exp(i(x - pi/4))
        const cplx e0{r * (cs + sn), r * (sn - cs)};
        const cplx e1{e0.imag(), -e0.real()};
        return {amp * cplx{env[0], env[1]} * e0, amp * cplx{env[2], env[3]} * e1};
    }

private:
    FastHankel01() {
        for (int p = 0; p < n_panels; ++p) lo_[p] = (p + 1 < n_panels) ? std::ldexp(1.0, -(p + 1)) : 0.0;
        constexpr int m = degree + 1;
        for (int p = 0; p < n_panels; ++p) {
            const double a = lo_[p], b = (p == 0) ? 1.0 : lo_[p - 1];
            std::array<std::array<double, 4>, m> f{};
            for (int j = 0; j < m; ++j) {
                const double t = std::cos(std::numbers::pi * (j + 0.5) / m);
                const double x = x_switch / (0.5 * (a + b) + 0.5 * (b - a) * t);
                const Hankel01 h = hankel01(x);
                const double scale = std::sqrt(std::numbers::pi * x / 2.0);
                const cplx ph{std::cos(x - 0.25 * std::numbers::pi), -std::sin(x - 0.25 * std::numbers::pi)};
                const cplx a0 = h.h0 * scale * ph;
                const cplx a1 = h.h1 * scale * ph * cplx{0.0, 1.0};
                f[j] = {a0.real(), a0.imag(), a1.real(), a1.imag()};
            }
            for (int k = 0; k < m; ++k) {
                std::array<double, 4> s{};
                for (int j = 0; j < m; ++j) {
                    const double w = std::cos(std::numbers::pi * k * (j + 0.5) / m);
                    for (int q = 0; q < 4; ++q) s[q] += f[j][q] * w;
                }
                for (int q = 0; q < 4; ++q) coef_[p][k][q] = s[q] * (k == 0 ? 1.0 : 2.0) / m;
            }
        }
    }

    std::array<double, n_panels> lo_{};
    std::array<std::array<std::array<double, 4>, degree + 1>, n_panels> coef_{};
};

inline Hankel01 fast_hankel01(double x) { return FastHankel01::instance()(x); }

/// Derivative of J_n.
inline double bessel_jn_prime(int n, double x) {
    if (n == 0) return -bessel_j1(x);
    return 0.5 * (bessel_jn(n - 1, x) - bessel_jn(n + 1, x));
}

}  // namespace qerlab::special
