#pragma once

// Nystrom grid on the boundary. Nodes are equispaced in a periodic parameter
// t in [0, 2 pi); the map t -> y is either linear or Kress's sigmoidal
// substitution (grading exponent 3) on every panel between grading points.
// Grading points are all arc junctions (curvature jumps spoil the spectral
// accuracy of the uniform rule as well), or the sharp corners only on request.

#include <cmath>
#include <vector>

#include "qerlab/errors.hpp"
#include "qerlab/geometry.hpp"
#include "qerlab/numerics.hpp"

namespace qerlab {

enum class GridGrading {
    automatic,   // graded at every arc junction if there are any, uniform otherwise
    uniform,
    corners,     // graded at sharp corners only
};

class BoundaryGrid {
public:
    static constexpr double grading_exponent = 3.0;

    /// Node count for `points_per_wavelength` at frequency lambda, rounded up
    /// to a multiple of 4 so that reflection symmetries map nodes to nodes.
    /// The graded substitution runs at twice the mean speed mid-panel, so
    /// graded grids get twice the nodes to meet the spacing bound there.
    static int nodes_for(const Domain& domain, double lambda, double points_per_wavelength, int min_nodes = 64,
                         GridGrading grading = GridGrading::automatic) {
        const double wavelengths = domain.perimeter() * lambda / two_pi;
        int n = static_cast<int>(std::ceil(points_per_wavelength * wavelengths));
        // 2% and 8 nodes of slack absorb the per-panel rounding
        if (grades(domain, grading)) n = static_cast<int>(std::ceil(2.04 * n)) + 8;
        n = std::max(n, min_nodes);
        return (n + 3) / 4 * 4;
    }

    static bool grades(const Domain& domain, GridGrading grading) {
        switch (grading) {
            case GridGrading::uniform: return false;
            case GridGrading::corners: return domain.has_sharp_corners();
            case GridGrading::automatic: return !domain.corners().empty();
        }
        return false;
    }

    BoundaryGrid(const Domain& domain, int n, GridGrading grading = GridGrading::automatic)
        : n_(n), requested_(n), perimeter_(domain.perimeter()), grading_(grading) {
        if (n < 8 || n % 2 != 0) fail(ErrorKind::InvalidArgument, "grid needs an even node count >= 8");
        graded_ = grades(domain, grading);
        y_.resize(n);
        speed_.resize(n);
        if (!graded_) {
            if (const auto& sym = domain.symmetry()) y0_ = sym->flip_y ? sym->anchor_flip_y : sym->anchor_flip_x;
            for (int j = 0; j < n; ++j) {
                y_[j] = domain.wrap(y0_ + perimeter_ * j / n);
                speed_[j] = perimeter_ / two_pi;
            }
        } else {
            build_graded(domain, grading == GridGrading::automatic);
        }
        frames_.reserve(n_);
        for (int j = 0; j < n_; ++j) frames_.push_back(domain.frame_unchecked(y_[j]));
        build_tables();
    }

    int size() const { return n_; }
    /// Node count passed to the constructor; graded grids may round it.
    int requested_size() const { return requested_; }
    bool graded() const { return graded_; }
    GridGrading grading() const { return grading_; }
    double y0() const { return y0_; }
    double y(int j) const { return y_[j]; }
    double speed(int j) const { return speed_[j]; }
    double weight(int j) const { return speed_[j] * two_pi / n_; }
    const Frame& frame(int j) const { return frames_[j]; }
    double perimeter() const { return perimeter_; }

    /// Largest arc-length gap between consecutive nodes.
    double max_spacing() const {
        double h = 0.0;
        for (int j = 0; j < n_; ++j) {
            double d = y_[(j + 1) % n_] - y_[j];
            if (d < 0.0) d += perimeter_;
            h = std::max(h, d);
        }
        return h;
    }
    double points_per_wavelength(double lambda) const { return two_pi / (lambda * max_spacing()); }

    /// Periodic parameter of node j; nodes are equispaced in t.
    double node_param(int j) const { return two_pi * (j + (graded_ ? 0.5 : 0.0)) / n_; }

    /// Parameter t in [0, 2 pi) of the boundary point at arc length y.
    double param_of(double y) const {
        if (!graded_) {
            double u = std::fmod(y - y0_, perimeter_);
            if (u < 0.0) u += perimeter_;
            return two_pi * u / perimeter_;
        }
        const std::size_t K = panel_start_.size();
        std::size_t k = K - 1;
        double off = 0.0;
        for (std::size_t i = 0; i < K; ++i) {
            double u = std::fmod(y - panel_start_[i], perimeter_);
            if (u < 0.0) u += perimeter_;
            if (u < panel_len_[i]) {
                k = i;
                off = u;
                break;
            }
        }
        // invert the monotone substitution w(s) = 2 pi off / len by bisection
        const double target = two_pi * off / panel_len_[k];
        double a = 0.0, b = two_pi;
        for (int it = 0; it < 60; ++it) {
            const double m = 0.5 * (a + b);
            if (substitution(m) < target) a = m; else b = m;
        }
        const double s = 0.5 * (a + b);
        return two_pi * panel_first_[k] / n_ + s * panel_count_[k] / n_;
    }

    /// Kress weight R_k for the log(4 sin^2((t_i - t_j)/2)) part, k = |i - j| mod n.
    double kress_weight(int k) const { return kress_[k]; }
    /// log(4 sin^2(pi k / n)), k != 0.
    double log_sin2(int k) const { return logsin_[k]; }

private:
    void build_graded(const Domain& domain, bool all_junctions) {
        std::vector<double> corners;
        for (std::size_t i = 0; i < domain.corners().size(); ++i)
            if (all_junctions || domain.corner_is_sharp(i)) corners.push_back(domain.corners()[i]);
        const std::size_t K = corners.size();
        std::vector<double> len(K);
        for (std::size_t k = 0; k < K; ++k) {
            double l = (k + 1 < K ? corners[k + 1] : corners[0] + perimeter_) - corners[k];
            if (K == 1) l = perimeter_;
            len[k] = l;
        }
        // Rounding per panel keeps equal-length panels at equal counts, so
        // reflections map nodes to nodes; the total may differ slightly from n.
        std::vector<int> count(K);
        int total = 0;
        for (std::size_t k = 0; k < K; ++k) {
            count[k] = std::max(4, 2 * static_cast<int>(std::lround(0.5 * requested_ * len[k] / perimeter_)));
            total += count[k];
        }
        n_ = total;
        y_.resize(n_);
        speed_.resize(n_);
        panel_start_ = corners;
        panel_len_ = len;
        panel_count_ = count;
        panel_first_.assign(K, 0);
        for (std::size_t k = 1; k < K; ++k) panel_first_[k] = panel_first_[k - 1] + count[k - 1];
        const double p = grading_exponent;
        auto v = [p](double s) { return (1.0 / p - 0.5) * std::pow((pi - s) / pi, 3) + (s - pi) / (p * pi) + 0.5; };
        auto dv = [p](double s) { return -3.0 * (1.0 / p - 0.5) * (pi - s) * (pi - s) / (pi * pi * pi) + 1.0 / (p * pi); };
        int j = 0;
        for (std::size_t k = 0; k < K; ++k) {
            for (int i = 0; i < count[k]; ++i, ++j) {
                const double s = two_pi * (i + 0.5) / count[k];
                const double a = v(s), b = v(two_pi - s);
                const double ap = std::pow(a, p), bp = std::pow(b, p);
                const double w = two_pi * ap / (ap + bp);
                const double dw = two_pi * p * (std::pow(a, p - 1) * dv(s) * bp + ap * std::pow(b, p - 1) * dv(two_pi - s)) /
                                  ((ap + bp) * (ap + bp));
                y_[j] = domain.wrap(corners[k] + len[k] * w / two_pi);
                speed_[j] = len[k] / two_pi * dw * static_cast<double>(n_) / count[k];
            }
        }
    }

    static double substitution(double s) {
        const double p = grading_exponent;
        auto v = [p](double x) { return (1.0 / p - 0.5) * std::pow((pi - x) / pi, 3) + (x - pi) / (p * pi) + 0.5; };
        const double ap = std::pow(v(s), p), bp = std::pow(v(two_pi - s), p);
        return two_pi * ap / (ap + bp);
    }

    void build_tables() {
        const int m = n_ / 2;
        kress_.assign(n_, 0.0);
        logsin_.assign(n_, 0.0);
        for (int k = 0; k < n_; ++k) {
            const double t = pi * k / m;
            double r = 0.0;
            for (int l = 1; l < m; ++l) r += std::cos(l * t) / l;
            kress_[k] = -two_pi / m * r - pi / (static_cast<double>(m) * m) * std::cos(m * t);
            if (k > 0) {
                const double sn = std::sin(pi * k / n_);
                logsin_[k] = std::log(4.0 * sn * sn);
            }
        }
    }

    int n_;
    int requested_;
    double perimeter_;
    GridGrading grading_ = GridGrading::automatic;
    bool graded_ = false;
    double y0_ = 0.0;
    std::vector<double> y_, speed_;
    std::vector<Frame> frames_;
    std::vector<double> kress_, logsin_;
    std::vector<double> panel_start_, panel_len_;
    std::vector<int> panel_count_, panel_first_;
};

}  // namespace qerlab
