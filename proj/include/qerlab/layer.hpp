#pragma once

// Nystrom discretization of the boundary jump operators.
//
// Neumann: A(lambda) with kernel 2 d/dnu_q G(q_i, q_j), nu the inward normal;
//   eigenvalues are the lambda where I - A is singular.
// Dirichlet: single layer S(lambda) with kernel G(q_i, q_j); eigenvalues are
//   the lambda where S is singular.
//
// Dirichlet scans use the second-kind adjoint jump B(lambda) with kernel
//   2 d/dnu_p G(q_i, q_j), whose null vectors are the normal derivatives of
//   Dirichlet eigenfunctions; I - B is singular exactly at Dirichlet eigenvalues.
//
// All kernels carry a log|t - t'| singularity that is split off and
// integrated with Kress's weights; the remainder uses the trapezoid rule.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qerlab/boundary_grid.hpp"
#include "qerlab/errors.hpp"
#include "qerlab/geometry.hpp"
#include "qerlab/numerics.hpp"
#include "qerlab/special.hpp"

namespace qerlab {

using cplx = std::complex<double>;

enum class BoundaryCondition { dirichlet, neumann };

inline const char* bc_name(BoundaryCondition bc) { return bc == BoundaryCondition::dirichlet ? "dirichlet" : "neumann"; }

inline BoundaryCondition parse_bc(const std::string& s) {
    if (s == "dirichlet") return BoundaryCondition::dirichlet;
    if (s == "neumann") return BoundaryCondition::neumann;
    fail(ErrorKind::InvalidConfig, "unknown boundary condition '" + s + "'");
}

inline constexpr double euler_gamma = 0.57721566490153286061;
inline constexpr double min_points_per_wavelength = 6.0;
inline constexpr double warn_points_per_wavelength = 10.0;

/// Throws UnderResolved below 6 points per wavelength; returns false below 10.
inline bool check_resolution(const BoundaryGrid& grid, double lambda) {
    const double ppw = grid.points_per_wavelength(lambda);
    if (ppw < min_points_per_wavelength)
        fail(ErrorKind::UnderResolved, "grid has " + std::to_string(ppw) + " points per wavelength at lambda=" +
                                           std::to_string(lambda));
    return ppw >= warn_points_per_wavelength;
}

namespace detail {

/// Flat copies of the node data used by the inner kernel loops.
struct NodeArrays {
    std::vector<double> px, py, nx, ny, speed, kappa;
    explicit NodeArrays(const BoundaryGrid& g) {
        const int n = g.size();
        px.resize(n); py.resize(n); nx.resize(n); ny.resize(n); speed.resize(n); kappa.resize(n);
        for (int j = 0; j < n; ++j) {
            const Frame& f = g.frame(j);
            px[j] = f.point.x; py[j] = f.point.y;
            nx[j] = f.normal.x; ny[j] = f.normal.y;
            speed[j] = g.speed(j);
            kappa[j] = f.curvature;
        }
    }
};

enum class Kernel { double_layer, adjoint_double_layer, single_layer };

/// Quadrature-weighted matrix entry (i, j) of A, B or S.
inline cplx jump_entry(const BoundaryGrid& g, const NodeArrays& a, int i, int j, double lambda, Kernel kernel) {
    const int n = g.size();
    const double h = pi / (n / 2);  // trapezoid weight in t
    const int k = (i >= j) ? i - j : j - i;
    const double rk = g.kress_weight(k);
    const double sp = a.speed[j];
    if (kernel != Kernel::single_layer) {
        const bool adjoint = kernel == Kernel::adjoint_double_layer;
        if (i == j) return h * (adjoint ? -a.kappa[j] : a.kappa[j]) / two_pi * sp;
        const double dx = a.px[i] - a.px[j], dy = a.py[i] - a.py[j];
        const double r = std::sqrt(dx * dx + dy * dy);
        const double dn = adjoint ? (dx * a.nx[i] + dy * a.ny[i]) / r : (dx * a.nx[j] + dy * a.ny[j]) / r;
        const auto hk = special::fast_hankel01(lambda * r);
        const cplx kern = cplx{0.0, 0.5 * lambda} * hk.h1 * dn * sp;
        const double l1 = -lambda / two_pi * hk.h1.real() * dn * sp;
        return rk * l1 + h * (kern - l1 * g.log_sin2(k));
    }
    if (i == j) {
        const double m1 = -sp / (4.0 * pi);
        const cplx m2 = cplx{-(std::log(0.5 * lambda * sp) + euler_gamma) / two_pi, 0.25} * sp;
        return rk * m1 + h * m2;
    }
    const double dx = a.px[i] - a.px[j], dy = a.py[i] - a.py[j];
    const double r = std::sqrt(dx * dx + dy * dy);
    const auto hk = special::fast_hankel01(lambda * r);
    const cplx kern = cplx{0.0, 0.25} * hk.h0 * sp;
    const double m1 = -hk.h0.real() * sp / (4.0 * pi);
    return rk * m1 + h * (kern - m1 * g.log_sin2(k));
}

/// Kernel whose I - K form characterizes eigenvalues of `bc` in the scan.
inline Kernel scan_kernel(BoundaryCondition bc) {
    return bc == BoundaryCondition::neumann ? Kernel::double_layer : Kernel::adjoint_double_layer;
}

inline Eigen::MatrixXcd assemble_kernel(const BoundaryGrid& grid, double lambda, Kernel kernel, int threads) {
    check_resolution(grid, lambda);
    const NodeArrays arr(grid);
    const int n = grid.size();
    Eigen::MatrixXcd m(n, n);
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
        for (int j = 0; j < n; ++j) m(static_cast<int>(i), j) = jump_entry(grid, arr, static_cast<int>(i), j, lambda, kernel);
    });
    return m;
}

}  // namespace detail

/// Full matrix of A(lambda) (Neumann) or S(lambda) (Dirichlet).
inline Eigen::MatrixXcd assemble_boundary_jump(const BoundaryGrid& grid, double lambda, BoundaryCondition bc, int threads = 1) {
    return detail::assemble_kernel(grid, lambda, bc == BoundaryCondition::neumann ? detail::Kernel::double_layer
                                                                                  : detail::Kernel::single_layer, threads);
}

/// Full matrix of B(lambda), the adjoint jump used for Dirichlet eigenvalues.
inline Eigen::MatrixXcd assemble_adjoint_jump(const BoundaryGrid& grid, double lambda, int threads = 1) {
    return detail::assemble_kernel(grid, lambda, detail::Kernel::adjoint_double_layer, threads);
}

// ---------------------------------------------------------------------------
// Reflection symmetry

/// Group of node permutations induced by the domain's axis reflections.
/// Element g is encoded by bits (1: flip_y, 2: flip_x).
struct SymmetryGroup {
    std::vector<int> elements;
    std::vector<std::vector<int>> perms;

    static SymmetryGroup trivial(int n) {
        SymmetryGroup s;
        s.elements = {0};
        std::vector<int> id(n);
        for (int j = 0; j < n; ++j) id[j] = j;
        s.perms = {id};
        return s;
    }

    /// Reflection group of the grid, found by matching reflected nodes;
    /// trivial when the domain declares no symmetry or the nodes are not invariant.
    static SymmetryGroup of(const Domain& domain, const BoundaryGrid& grid) {
        const int n = grid.size();
        const auto& sym = domain.symmetry();
        SymmetryGroup s = trivial(n);
        if (!sym) return s;
        const double tol = 1e-9 * domain.diameter();
        std::vector<int> by_x(n);
        for (int j = 0; j < n; ++j) by_x[j] = j;
        std::sort(by_x.begin(), by_x.end(), [&](int a, int b) { return grid.frame(a).point.x < grid.frame(b).point.x; });
        auto match = [&](Vec2 q) {
            auto it = std::lower_bound(by_x.begin(), by_x.end(), q.x - tol,
                                       [&](int a, double x) { return grid.frame(a).point.x < x; });
            for (; it != by_x.end() && grid.frame(*it).point.x <= q.x + tol; ++it)
                if (distance(grid.frame(*it).point, q) <= tol) return *it;
            return -1;
        };
        auto build = [&](Vec2 (*reflect)(Vec2), std::vector<int>& p) {
            p.assign(n, -1);
            for (int j = 0; j < n; ++j) {
                p[j] = match(reflect(grid.frame(j).point));
                if (p[j] < 0 || std::abs(grid.speed(p[j]) - grid.speed(j)) > 1e-9 * grid.speed(j)) return false;
            }
            return true;
        };
        std::vector<int> py, px;
        const bool ok_y = sym->flip_y && build([](Vec2 v) { return Vec2{v.x, -v.y}; }, py);
        const bool ok_x = sym->flip_x && build([](Vec2 v) { return Vec2{-v.x, v.y}; }, px);
        if (ok_y) { s.elements.push_back(1); s.perms.push_back(py); }
        if (ok_x) { s.elements.push_back(2); s.perms.push_back(px); }
        if (ok_y && ok_x) {
            std::vector<int> pxy(n);
            for (int j = 0; j < n; ++j) pxy[j] = px[py[j]];
            s.elements.push_back(3);
            s.perms.push_back(pxy);
        }
        return s;
    }

    std::size_t order() const { return elements.size(); }
    bool has_flip_y() const { return std::find(elements.begin(), elements.end(), 1) != elements.end(); }
    bool has_flip_x() const { return std::find(elements.begin(), elements.end(), 2) != elements.end(); }
};

/// Parity under (x, y) -> (x, -y) and (x, y) -> (-x, y); 0 when that
/// reflection is not part of the group.
struct SymmetryClass {
    int py = 0;
    int px = 0;
    double character(int element) const {
        double c = 1.0;
        if (element & 1) c *= py;
        if (element & 2) c *= px;
        return c;
    }
    std::string label() const {
        auto p = [](int v) { return v == 0 ? std::string("*") : (v > 0 ? std::string("+") : std::string("-")); };
        return p(px) + p(py);
    }
};

inline std::vector<SymmetryClass> symmetry_classes(const SymmetryGroup& g) {
    std::vector<int> ys = g.has_flip_y() ? std::vector<int>{1, -1} : std::vector<int>{0};
    std::vector<int> xs = g.has_flip_x() ? std::vector<int>{1, -1} : std::vector<int>{0};
    std::vector<SymmetryClass> out;
    for (int x : xs)
        for (int y : ys) out.push_back({y, x});
    return out;
}

/// Orthonormal basis of the grid vectors transforming by a class's character:
/// one basis vector per orbit whose stabilizer acts trivially.
struct ReducedBasis {
    SymmetryClass cls;
    std::vector<int> reps;         // representative node per basis vector
    std::vector<int> orbit_size;
    std::vector<int> column_of;    // node -> basis index, -1 if excluded
    std::vector<double> sign_of;   // node -> character of the element mapping its rep onto it

    int size() const { return static_cast<int>(reps.size()); }

    ReducedBasis(const SymmetryGroup& g, SymmetryClass c, int n) : cls(c), column_of(n, -1), sign_of(n, 0.0) {
        std::vector<char> seen(n, 0);
        for (int j = 0; j < n; ++j) {
            if (seen[j]) continue;
            bool allowed = true;
            std::vector<int> orbit;
            for (std::size_t e = 0; e < g.order(); ++e) {
                const int k = g.perms[e][j];
                if (k == j && c.character(g.elements[e]) < 0) allowed = false;
                if (std::find(orbit.begin(), orbit.end(), k) == orbit.end()) orbit.push_back(k);
            }
            for (int k : orbit) seen[k] = 1;
            if (!allowed) continue;
            const int b = size();
            reps.push_back(j);
            orbit_size.push_back(static_cast<int>(orbit.size()));
            for (std::size_t e = 0; e < g.order(); ++e) {
                const int k = g.perms[e][j];
                column_of[k] = b;
                sign_of[k] = c.character(g.elements[e]);
            }
        }
    }

    /// Full grid vector from reduced coordinates.
    Eigen::VectorXcd unfold(const Eigen::VectorXcd& v) const {
        Eigen::VectorXcd u = Eigen::VectorXcd::Zero(static_cast<int>(column_of.size()));
        for (std::size_t j = 0; j < column_of.size(); ++j) {
            const int b = column_of[j];
            if (b >= 0) u(static_cast<int>(j)) = sign_of[j] * v(b) / std::sqrt(static_cast<double>(orbit_size[b]));
        }
        return u;
    }
};

/// Restriction of the operator whose singularity marks eigenvalues, I - A
/// (Neumann) or I - B (Dirichlet), to the span of a reduced basis.
inline Eigen::MatrixXcd assemble_reduced_operator(const BoundaryGrid& grid, const ReducedBasis& basis, double lambda,
                                                  BoundaryCondition bc, int threads = 1) {
    check_resolution(grid, lambda);
    const detail::NodeArrays arr(grid);
    const auto kernel = detail::scan_kernel(bc);
    const int n = grid.size(), m = basis.size();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(m, m);
    std::vector<double> inv_sqrt(m);
    for (int b = 0; b < m; ++b) inv_sqrt[b] = 1.0 / std::sqrt(static_cast<double>(basis.orbit_size[b]));
    parallel_for(static_cast<std::size_t>(m), threads, [&](std::size_t a_) {
        const int a = static_cast<int>(a_);
        const int i = basis.reps[a];
        const double sa = std::sqrt(static_cast<double>(basis.orbit_size[a]));
        for (int j = 0; j < n; ++j) {
            const int b = basis.column_of[j];
            if (b < 0) continue;
            out(a, b) += basis.sign_of[j] * sa * inv_sqrt[b] * detail::jump_entry(grid, arr, i, j, lambda, kernel);
        }
    });
    out = -out;
    out.diagonal().array() += 1.0;
    return out;
}

// ---------------------------------------------------------------------------
// Layer potentials off the boundary

struct FieldValue {
    cplx value;
    std::array<cplx, 2> grad;
};

/// Field represented by a boundary trace at an arbitrary point x off the
/// boundary: Neumann phi(x) = int d/dnu_q G(x, q) u dsigma, Dirichlet
/// phi(x) = -lambda int G(x, q) u dsigma. No distance checks.
inline FieldValue layer_field(const BoundaryGrid& grid, const std::vector<cplx>& trace, double lambda, BoundaryCondition bc,
                              Vec2 x, bool with_gradient = true) {
    FieldValue out{{0.0, 0.0}, {cplx{0.0, 0.0}, cplx{0.0, 0.0}}};
    const int n = grid.size();
    const cplx I{0.0, 1.0};
    for (int j = 0; j < n; ++j) {
        const Frame& f = grid.frame(j);
        const double w = grid.weight(j);
        if (w == 0.0) continue;
        const double dx = x.x - f.point.x, dy = x.y - f.point.y;
        const double r = std::sqrt(dx * dx + dy * dy);
        const auto h = special::fast_hankel01(lambda * r);
        const cplx wu = w * trace[j];
        if (bc == BoundaryCondition::neumann) {
            const double dn = dx * f.normal.x + dy * f.normal.y;
            const cplx c = I * lambda / 4.0;
            out.value += c * h.h1 * (dn / r) * wu;
            if (with_gradient) {
                // grad of H1(lambda r) dn / r = nu H1 / r + dn (lambda H0 - 2 H1 / r) / r^2 * d
                const cplx f1 = h.h1 / r;
                const cplx f2 = dn * (lambda * h.h0 - 2.0 * h.h1 / r) / (r * r);
                out.grad[0] += c * (f.normal.x * f1 + f2 * dx) * wu;
                out.grad[1] += c * (f.normal.y * f1 + f2 * dy) * wu;
            }
        } else {
            out.value += -lambda * (I / 4.0) * h.h0 * wu;
            if (with_gradient) {
                const cplx g = -lambda * (-I * lambda / 4.0) * h.h1 / r * wu;
                out.grad[0] += g * dx;
                out.grad[1] += g * dy;
            }
        }
    }
    return out;
}

}  // namespace qerlab
