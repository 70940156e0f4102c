#pragma once

// Trigonometric interpolation and spectral differentiation of periodic
// samples, on top of Eigen's FFT module.

#include <cmath>
#include <complex>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "qerlab/numerics.hpp"

namespace qerlab {

using cplx = std::complex<double>;

inline std::vector<cplx> fft_forward(const std::vector<cplx>& f) {
    Eigen::FFT<double> fft;
    std::vector<cplx> out;
    fft.fwd(out, f);
    return out;
}

inline std::vector<cplx> fft_inverse(const std::vector<cplx>& c) {
    Eigen::FFT<double> fft;
    std::vector<cplx> out;
    fft.inv(out, c);  // includes the 1/n factor
    return out;
}

/// Signed frequency of DFT bin k for length n.
inline int dft_frequency(int k, int n) { return k <= n / 2 ? k : k - n; }

/// Samples of the derivative of a periodic function sampled at t_j = t0 + 2 pi j / n.
/// The Nyquist mode is dropped.
inline std::vector<cplx> periodic_derivative(const std::vector<cplx>& f) {
    const int n = static_cast<int>(f.size());
    auto c = fft_forward(f);
    for (int k = 0; k < n; ++k) {
        const int m = dft_frequency(k, n);
        c[k] *= (2 * m == n) ? cplx{0.0, 0.0} : cplx{0.0, static_cast<double>(m)};
    }
    return fft_inverse(c);
}

/// Trigonometric interpolant through samples at t_j = t0 + 2 pi j / n.
class PeriodicInterpolant {
public:
    PeriodicInterpolant() = default;
    PeriodicInterpolant(const std::vector<cplx>& samples, double t0) : t0_(t0), n_(static_cast<int>(samples.size())) {
        coef_ = fft_forward(samples);
        for (auto& c : coef_) c /= static_cast<double>(n_);
    }

    cplx operator()(double t) const {
        const double x = t - t0_;
        cplx sum{0.0, 0.0};
        // e^{i m x} built by recurrence for m = 1 .. n/2
        const cplx step{std::cos(x), std::sin(x)};
        cplx e{1.0, 0.0};
        sum += coef_[0];
        for (int m = 1; 2 * m <= n_; ++m) {
            e *= step;
            if (2 * m == n_) {
                sum += coef_[m] * e.real();
            } else {
                sum += coef_[m] * e + coef_[n_ - m] * std::conj(e);
            }
        }
        return sum;
    }

    int size() const { return n_; }

private:
    double t0_ = 0.0;
    int n_ = 0;
    std::vector<cplx> coef_;
};

}  // namespace qerlab
