#pragma once

// Eigenvalue search for the boundary-integral formulation: sigma_min of the
// reduced operator is sampled on a Weyl-law step in every symmetry class,
// local minima are refined, and traces are read off the singular vectors.

#include <algorithm>
#include <functional>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include "qerlab/boundary_grid.hpp"
#include "qerlab/errors.hpp"
#include "qerlab/geometry.hpp"
#include "qerlab/layer.hpp"
#include "qerlab/numerics.hpp"

namespace qerlab {

/// Eigenvalue with its boundary trace u^b at the nodes of BoundaryGrid(domain, n_nodes):
/// u restricted to the boundary for Neumann modes, lambda^{-1} d/dnu u for Dirichlet modes.
struct EigenMode {
    double lambda = 0.0;
    BoundaryCondition bc = BoundaryCondition::dirichlet;
    int n_nodes = 0;              // requested node count; BoundaryGrid(domain, n_nodes, grading)
    GridGrading grading = GridGrading::automatic;
    std::vector<cplx> trace;
    double residual = 0.0;        // sigma_min of the reduced operator at lambda
    double second_singular = 0.0;
    double leakage = 0.0;         // exterior / interior field ratio next to the boundary
    double imag_residue = 0.0;    // max |Im u| / max |u| after the phase rotation
    SymmetryClass symmetry;
    // normalization metadata
    bool normalized = false;
    double norm_interior = std::numeric_limits<double>::quiet_NaN();  // ||phi||^2 before scaling
    double norm_rellich = std::numeric_limits<double>::quiet_NaN();
    double normalization_discrepancy = std::numeric_limits<double>::quiet_NaN();
    std::string domain_hash;
};

/// Weyl counting function N(lambda) ~ area lambda^2 / 4 pi -+ perimeter lambda / 4 pi.
inline double weyl_count(const Domain& d, BoundaryCondition bc, double lambda) {
    const double s = (bc == BoundaryCondition::dirichlet) ? -1.0 : 1.0;
    return d.area() * lambda * lambda / (4.0 * pi) + s * d.perimeter() * lambda / (4.0 * pi);
}

inline double weyl_density(const Domain& d, double lambda) {
    return d.area() * lambda / two_pi + d.perimeter() / (4.0 * pi);
}

struct ScanOptions {
    double points_per_wavelength = 10.0;
    int fixed_nodes = 0;          // > 0: one grid of this size for the whole window
    double step_fraction = 0.125; // scan step as a fraction of the mean level spacing within a class
    double max_step = 0.1;
    double lambda_tol = 1e-9;
    double residual_tol = 1e-3;
    double leakage_tol = 1e-3;
    double grid_growth = 0.1;     // new grid once the required node count grows by this fraction
    GridGrading grading = GridGrading::automatic;
    bool use_symmetry = true;
    int threads = 1;
};

struct RejectedMinimum {
    double lambda;
    double residual;
    double leakage;
    std::string reason;
};

struct CountingPoint {
    double lambda;
    int count;        // modes found in [window_lo, lambda]
    double weyl;      // Weyl increment over the same range
};

struct ScanReport {
    std::vector<EigenMode> modes;
    std::vector<RejectedMinimum> rejected;
    std::vector<std::string> warnings;
    std::vector<CountingPoint> counting;
    long evaluations = 0;
};

/// sigma_min of a square matrix by inverse iteration on M^H M with one LU factorization.
inline double smallest_singular_value(const Eigen::MatrixXcd& m, int max_iter = 40, double tol = 1e-12) {
    const int n = static_cast<int>(m.rows());
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(m);
    std::mt19937_64 rng(0x5EEDULL + static_cast<unsigned long long>(n));
    std::normal_distribution<double> nd;
    Eigen::VectorXcd x(n);
    for (int i = 0; i < n; ++i) x(i) = cplx{nd(rng), nd(rng)};
    x.normalize();
    double est = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iter; ++it) {
        const Eigen::VectorXcd y = lu.solve(x);
        const Eigen::VectorXcd z = lu.adjoint().solve(y);
        const double nz = z.norm();
        if (!std::isfinite(nz)) return 0.0;
        const double next = 1.0 / std::sqrt(nz);
        x = z / nz;
        if (std::abs(next - est) <= tol * next) return next;
        est = next;
    }
    return est;
}

namespace detail {

struct ClassContext {
    const BoundaryGrid* grid;
    ReducedBasis basis;
    BoundaryCondition bc;
    int threads;
    long* evaluations;

    double sigma(double lambda) const {
        ++*evaluations;
        return smallest_singular_value(assemble_reduced_operator(*grid, basis, lambda, bc, threads));
    }
};

/// Exterior-to-interior rms ratio of the layer field at distance d from the boundary.
inline double exterior_leakage(const BoundaryGrid& grid, const std::vector<cplx>& trace, double lambda, BoundaryCondition bc) {
    const int n = grid.size();
    const double d = 3.0 * grid.max_spacing();
    const int probes = std::min(n, 64);
    double in2 = 0.0, out2 = 0.0;
    for (int k = 0; k < probes; ++k) {
        const int j = static_cast<int>((static_cast<long>(k) * n) / probes);
        const Frame& f = grid.frame(j);
        in2 += std::norm(layer_field(grid, trace, lambda, bc, f.point + d * f.normal, false).value);
        out2 += std::norm(layer_field(grid, trace, lambda, bc, f.point - d * f.normal, false).value);
    }
    return in2 > 0.0 ? std::sqrt(out2 / in2) : std::numeric_limits<double>::infinity();
}

inline double weighted_dot_real(const BoundaryGrid& g, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    double s = 0.0;
    for (int j = 0; j < g.size(); ++j) s += g.weight(j) * a(j) * b(j);
    return s;
}

/// Real orthonormal (weighted) basis for the span of `k` complex null vectors,
/// returned as real traces with a deterministic sign.
inline std::vector<Eigen::VectorXd> real_basis(const BoundaryGrid& g, const std::vector<Eigen::VectorXcd>& vecs,
                                               std::vector<double>& imag_residue) {
    const int n = g.size();
    const std::size_t k = vecs.size();
    std::vector<Eigen::VectorXd> out;
    imag_residue.assign(k, 0.0);
    if (k == 1) {
        // Phase that makes sum w u^2 real and positive maximizes the real part.
        cplx s{0.0, 0.0};
        for (int j = 0; j < n; ++j) s += g.weight(j) * vecs[0](j) * vecs[0](j);
        const cplx rot = std::polar(1.0, -0.5 * std::arg(s));
        Eigen::VectorXcd u = vecs[0] * rot;
        const double mx = u.cwiseAbs().maxCoeff();
        imag_residue[0] = u.imag().cwiseAbs().maxCoeff() / mx;
        out.push_back(u.real());
    } else {
        Eigen::MatrixXd parts(n, 2 * k);
        Eigen::VectorXd sw(n);
        for (int j = 0; j < n; ++j) sw(j) = std::sqrt(g.weight(j));
        for (std::size_t c = 0; c < k; ++c) {
            parts.col(2 * c) = vecs[c].real().cwiseProduct(sw);
            parts.col(2 * c + 1) = vecs[c].imag().cwiseProduct(sw);
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(parts, Eigen::ComputeThinU);
        const auto& s = svd.singularValues();
        for (std::size_t c = 0; c < k; ++c) {
            out.push_back(svd.matrixU().col(static_cast<int>(c)).cwiseQuotient(sw));
            imag_residue[c] = s(static_cast<int>(k)) / s(0);
        }
        // weighted Gram-Schmidt on the real basis
        for (std::size_t c = 0; c < k; ++c) {
            for (std::size_t p = 0; p < c; ++p) out[c] -= weighted_dot_real(g, out[c], out[p]) * out[p];
            out[c] /= std::sqrt(weighted_dot_real(g, out[c], out[c]));
        }
    }
    for (auto& v : out) {
        Eigen::Index imax = 0;
        v.cwiseAbs().maxCoeff(&imax);
        if (v(imax) < 0.0) v = -v;
        v /= std::sqrt(weighted_dot_real(g, v, v));
    }
    return out;
}

/// Minimizer of f = sigma^2 on [a, b]. Brent's method locates the minimum to
/// about sqrt(eps) relative; since f vanishes quadratically at a true
/// singularity, parabolic steps through symmetric triples then go further.
template <class F>
std::pair<double, double> refine_minimum(F&& f, double a, double b, double tol) {
    std::uintmax_t iters = 200;
    auto best = boost::math::tools::brent_find_minima(f, a, b, std::numeric_limits<double>::digits / 2, iters);
    double x = best.first, fx = best.second;
    double h = std::max(10.0 * tol, 1e-7 * std::max(1.0, std::abs(x)));
    for (int it = 0; it < 6; ++it) {
        const double fm = f(x - h), fp = f(x + h);
        const double curv = fm - 2.0 * fx + fp;
        if (!(curv > 0.0)) break;
        const double off = std::clamp(0.5 * h * (fm - fp) / curv, -h, h);
        const double xn = std::clamp(x + off, a, b);
        const double fn = f(xn);
        if (!(fn <= fx)) break;
        x = xn;
        fx = fn;
        if (std::abs(off) < tol) break;
        h = std::max(2.0 * std::abs(off), tol);
    }
    return {x, fx};
}

}  // namespace detail

struct ScanChunk {
    double a, b;
    int n;  // boundary nodes for the whole chunk
};

/// Split [start, hi] into chunks whose grid grows by at most opt.grid_growth.
inline std::vector<ScanChunk> plan_chunks(const Domain& domain, double start, double hi, const ScanOptions& opt) {
    std::vector<ScanChunk> chunks;
    if (opt.fixed_nodes > 0) {
        chunks.push_back({start, hi, opt.fixed_nodes});
        return chunks;
    }
    double a = start;
    while (a < hi) {
        const int na = BoundaryGrid::nodes_for(domain, a, opt.points_per_wavelength, 64, opt.grading);
        double b = hi;
        if (BoundaryGrid::nodes_for(domain, hi, opt.points_per_wavelength, 64, opt.grading) > (1.0 + opt.grid_growth) * na)
            b = std::min(hi, a * (1.0 + opt.grid_growth));
        chunks.push_back({a, b, BoundaryGrid::nodes_for(domain, b, opt.points_per_wavelength, 64, opt.grading)});
        a = b;
    }
    return chunks;
}

/// Lower end of the scan: Faber-Krahn for Dirichlet; the Neumann scan skips lambda = 0.
inline double scan_start(const Domain& domain, BoundaryCondition bc, double lo) {
    double start = lo;
    if (bc == BoundaryCondition::dirichlet) start = std::max(lo, 0.9 * 2.404825557695773 * std::sqrt(pi / domain.area()));
    return std::max(start, 0.05 / domain.diameter());
}

/// Eigenvalues of `bc` in [lo, hi] with unnormalized traces (unit weighted l2 norm).
inline ScanReport spectrum_scan(const Domain& domain, BoundaryCondition bc, double lo, double hi, const ScanOptions& opt = {}) {
    if (!(hi > lo) || !(lo >= 0.0)) fail(ErrorKind::InvalidArgument, "spectrum window must satisfy 0 <= lo < hi");
    ScanReport report;
    const double start = scan_start(domain, bc, lo);
    if (start >= hi) return report;

    const std::vector<ScanChunk> chunks = plan_chunks(domain, start, hi, opt);

    for (const ScanChunk& ch : chunks) {
        const BoundaryGrid grid(domain, ch.n, opt.grading);
        if (!check_resolution(grid, ch.b))
            report.warnings.push_back("grid below 10 points per wavelength at lambda=" + std::to_string(ch.b));
        const SymmetryGroup group = opt.use_symmetry ? SymmetryGroup::of(domain, grid) : SymmetryGroup::trivial(grid.size());
        const auto classes = symmetry_classes(group);
        const double n_classes = static_cast<double>(classes.size());
        for (const SymmetryClass& cls : classes) {
            detail::ClassContext ctx{&grid, ReducedBasis(group, cls, grid.size()), bc, opt.threads, &report.evaluations};
            auto step_at = [&](double lam) {
                return std::min(opt.max_step, opt.step_fraction * n_classes / weyl_density(domain, lam));
            };
            std::vector<double> lam, sig;
            // two samples past each chunk end so every level in [a, b) has an interior minimum
            double x = std::max(0.5 * ch.a, ch.a - 2.0 * step_at(ch.a));
            int past = 0;
            while (past < 2) {
                lam.push_back(x);
                sig.push_back(ctx.sigma(x));
                if (x > ch.b) ++past;
                x += step_at(x);
            }
            std::vector<EigenMode> found;
            // Minima of sampled sigma; a bracket whose refined minimum is not a
            // singularity may hide a close pair, so it is resampled finer first.
            std::vector<double> minima;
            std::function<void(const std::vector<double>&, const std::vector<double>&, int)> bracket =
                [&](const std::vector<double>& ls, const std::vector<double>& ss, int depth) {
                    for (std::size_t k = 1; k + 1 < ls.size(); ++k) {
                        if (!(ss[k] < ss[k - 1] && ss[k] <= ss[k + 1])) continue;
                        const auto best = detail::refine_minimum(
                            [&](double l) { const double s = ctx.sigma(l); return s * s; }, ls[k - 1], ls[k + 1], opt.lambda_tol);
                        const double sstar = std::sqrt(std::max(best.second, 0.0));
                        if (sstar < opt.residual_tol) {
                            const double xs = best.first;
                            minima.push_back(xs);
                            // sigma grows like c |lambda - xs| around an isolated level; a neighbouring
                            // sample well below that line hides a second level on its side
                            const auto lo_j = static_cast<std::ptrdiff_t>(k) - 2, hi_j = static_cast<std::ptrdiff_t>(k) + 2;
                            double c = 0.0;
                            for (auto q = std::max<std::ptrdiff_t>(lo_j, 0); q <= std::min<std::ptrdiff_t>(hi_j, ls.size() - 1); ++q)
                                if (ls[q] != xs) c = std::max(c, ss[q] / std::abs(ls[q] - xs));
                            for (int side : {-1, 1}) {
                                if (depth >= 3) break;
                                std::ptrdiff_t far = -1;
                                for (int off = 1; off <= 2; ++off) {
                                    const auto q = static_cast<std::ptrdiff_t>(k) + side * off;
                                    if (q < 0 || q >= static_cast<std::ptrdiff_t>(ls.size())) break;
                                    if ((ls[q] - xs) * side > 0 && ss[q] < 0.7 * c * std::abs(ls[q] - xs)) far = q;
                                }
                                if (far < 0) continue;
                                const double a = side > 0 ? xs : ls[far], b = side > 0 ? ls[far] : xs;
                                std::vector<double> fl, fs;
                                if (side < 0 && far >= 1) {
                                    fl.push_back(ls[far - 1]);
                                    fs.push_back(ss[far - 1]);
                                }
                                for (int i = 0; i <= 8; ++i) {
                                    fl.push_back(a + (b - a) * i / 8.0);
                                    const bool at_xs = (side > 0 && i == 0) || (side < 0 && i == 8);
                                    fs.push_back(at_xs ? sstar : (i == 0 || i == 8) ? ss[far] : ctx.sigma(fl.back()));
                                }
                                if (side > 0 && far + 1 < static_cast<std::ptrdiff_t>(ls.size())) {
                                    fl.push_back(ls[far + 1]);
                                    fs.push_back(ss[far + 1]);
                                }
                                bracket(fl, fs, depth + 1);
                            }
                            continue;
                        }
                        if (depth < 3) {
                            // finer samples over the bracket, with one outer sample either side
                            std::vector<double> fl, fs;
                            if (k >= 2) {
                                fl.push_back(ls[k - 2]);
                                fs.push_back(ss[k - 2]);
                            }
                            for (int i = 0; i <= 8; ++i) {
                                fl.push_back(ls[k - 1] + (ls[k + 1] - ls[k - 1]) * i / 8.0);
                                fs.push_back(i == 0 ? ss[k - 1] : i == 8 ? ss[k + 1] : ctx.sigma(fl.back()));
                            }
                            if (k + 2 < ls.size()) {
                                fl.push_back(ls[k + 2]);
                                fs.push_back(ss[k + 2]);
                            }
                            const std::size_t before = minima.size();
                            bracket(fl, fs, depth + 1);
                            if (minima.size() > before) continue;
                        }
                        if (depth == 0)
                            report.rejected.push_back({best.first, sstar, std::numeric_limits<double>::quiet_NaN(), "residual"});
                    }
                };
            bracket(lam, sig, 0);
            std::sort(minima.begin(), minima.end());
            auto same = [](double a, double b) { return std::abs(a - b) < 1e-6 * std::max(1.0, std::max(a, b)); };
            minima.erase(std::unique(minima.begin(), minima.end(), same), minima.end());

            // A small second singular value is either a degenerate level or a distinct
            // level closer than the sampling resolved; a fine local scan tells them apart.
            // |d sigma / d lambda| next to a refined level
            auto slope_at = [&](double l1) {
                const double h = 1e-3;
                return std::max(ctx.sigma(l1 + h), ctx.sigma(l1 - h)) / h;
            };
            // second level of the same class close to l1; s2 / c estimates its distance
            auto partner = [&](double l1, double s2, double c) -> std::optional<double> {
                const double w = std::max(4.0 * s2 / c, 1e3 * opt.lambda_tol);
                std::vector<double> fl, fs;
                for (int i = -32; i <= 32; ++i) {
                    fl.push_back(l1 + w * i / 32.0);
                    fs.push_back(i == 0 ? 0.0 : ctx.sigma(fl.back()));
                }
                for (std::size_t k = 1; k + 1 < fl.size(); ++k) {
                    if (k == 32 || !(fs[k] < fs[k - 1] && fs[k] <= fs[k + 1])) continue;
                    const auto best = detail::refine_minimum(
                        [&](double l) { const double v = ctx.sigma(l); return v * v; }, fl[k - 1], fl[k + 1], opt.lambda_tol);
                    if (std::sqrt(std::max(best.second, 0.0)) < opt.residual_tol && !same(best.first, l1)) return best.first;
                }
                return std::nullopt;
            };
            std::vector<char> single(minima.size(), 0), done(minima.size(), 0);

            while (true) {
                const auto mi = static_cast<std::size_t>(std::find(done.begin(), done.end(), 0) - done.begin());
                if (mi == minima.size()) break;
                done[mi] = 1;
                const double lstar = minima[mi];
                bool duplicate = false;
                for (const auto& f : found)
                    if (same(f.lambda, lstar)) duplicate = true;
                if (duplicate) continue;

                const Eigen::MatrixXcd op = assemble_reduced_operator(grid, ctx.basis, lstar, bc, opt.threads);
                Eigen::JacobiSVD<Eigen::MatrixXcd> svd(op, Eigen::ComputeFullV);
                const auto& sv = svd.singularValues();
                const int m = static_cast<int>(sv.size());
                bool pair = m >= 2 && sv(m - 2) < opt.residual_tol && !single[mi];
                // a small second singular value means another level of this class
                // within about two scan steps, which the bracketing can merge
                const double c = m >= 2 && !single[mi] ? slope_at(lstar) : 0.0;
                if (m >= 2 && !single[mi] && sv(m - 2) < 2.0 * c * step_at(lstar)) {
                    if (const auto l2 = partner(lstar, sv(m - 2), c)) {
                        pair = false;
                        auto it = std::find_if(minima.begin(), minima.end(), [&](double x) { return same(x, *l2); });
                        if (it == minima.end()) {
                            const auto pos = std::upper_bound(minima.begin(), minima.end(), *l2) - minima.begin();
                            minima.insert(minima.begin() + pos, *l2);
                            single.insert(single.begin() + pos, 1);
                            done.insert(done.begin() + pos, 0);
                        } else {
                            single[it - minima.begin()] = 1;
                        }
                    }
                }
                if (lstar < ch.a || lstar >= ch.b) {
                    if (!(lstar == hi && ch.b == hi)) continue;
                }
                std::vector<Eigen::VectorXcd> null;
                null.push_back(ctx.basis.unfold(svd.matrixV().col(m - 1)));
                if (pair) null.push_back(ctx.basis.unfold(svd.matrixV().col(m - 2)));
                std::vector<double> imag;
                const auto real = detail::real_basis(grid, null, imag);
                for (std::size_t c = 0; c < real.size(); ++c) {
                    EigenMode mode;
                    mode.lambda = lstar;
                    mode.bc = bc;
                    mode.n_nodes = grid.requested_size();
                    mode.grading = opt.grading;
                    mode.trace.resize(grid.size());
                    for (int j = 0; j < grid.size(); ++j) mode.trace[j] = real[c](j);
                    mode.residual = sv(m - 1 - static_cast<int>(c));
                    mode.second_singular = m >= 2 ? sv(m - 2) : 0.0;
                    mode.imag_residue = imag[c];
                    mode.symmetry = cls;
                    mode.leakage = detail::exterior_leakage(grid, mode.trace, lstar, bc);
                    if (!(mode.leakage < opt.leakage_tol)) {
                        report.rejected.push_back({lstar, mode.residual, mode.leakage, "leakage"});
                        continue;
                    }
                    found.push_back(std::move(mode));
                }
            }
            for (auto& f : found) report.modes.push_back(std::move(f));
        }
    }
    std::sort(report.modes.begin(), report.modes.end(), [](const EigenMode& a, const EigenMode& b) { return a.lambda < b.lambda; });

    // Counting function against the Weyl increment, and gap checks.
    const double w0 = weyl_count(domain, bc, lo);
    for (std::size_t j = 0; j < report.modes.size(); ++j) {
        const double l = report.modes[j].lambda;
        report.counting.push_back({l, static_cast<int>(j + 1), weyl_count(domain, bc, l) - w0});
    }
    double prev = lo;
    for (const auto& m : report.modes) {
        const double mean_gap = 1.0 / weyl_density(domain, 0.5 * (prev + m.lambda));
        if (m.lambda - prev > 3.0 * mean_gap && prev > lo)
            report.warnings.push_back("MissedLevelWarning: gap " + std::to_string(m.lambda - prev) + " before lambda=" +
                                      std::to_string(m.lambda) + " exceeds 3x the Weyl mean spacing " + std::to_string(mean_gap));
        prev = m.lambda;
    }
    return report;
}

}  // namespace qerlab
