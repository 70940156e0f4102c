#pragma once

// Free outgoing Green function of the 2D Helmholtz operator,
// G(x, x') = (i/4) H_0(lambda |x - x'|), with first and mixed second derivatives.

#include <array>
#include <complex>

#include "qerlab/errors.hpp"
#include "qerlab/geometry.hpp"
#include "qerlab/special.hpp"

namespace qerlab {

using cplx = std::complex<double>;

struct GreenEval {
    cplx value;
    std::array<cplx, 2> grad_x;                        // d/dx_i G
    std::array<std::array<cplx, 2>, 2> grad_xx_mixed;  // d/dx_i d/dx'_j G
};

inline GreenEval green0(Vec2 x, Vec2 xp, double lambda) {
    const Vec2 d = x - xp;
    const double r = norm(d);
    if (!(r > 0.0)) fail(ErrorKind::CoincidentPoints, "Green function evaluated at coincident points");
    if (!(lambda > 0.0)) fail(ErrorKind::InvalidArgument, "lambda must be positive");
    const double z = lambda * r;
    const auto h = special::hankel01(z);
    const cplx I{0.0, 1.0};
    const cplx g1 = -I * lambda / 4.0 * h.h1;                       // dG/dr
    const cplx g2 = -I * lambda * lambda / 4.0 * (h.h0 - h.h1 / z);  // d2G/dr2
    const double e[2] = {d.x / r, d.y / r};
    GreenEval out;
    out.value = I / 4.0 * h.h0;
    for (int i = 0; i < 2; ++i) {
        out.grad_x[i] = g1 * e[i];
        for (int j = 0; j < 2; ++j) {
            const double delta = (i == j) ? 1.0 : 0.0;
            out.grad_xx_mixed[i][j] = -(g2 * e[i] * e[j] + g1 * (delta - e[i] * e[j]) / r);
        }
    }
    return out;
}

}  // namespace qerlab
