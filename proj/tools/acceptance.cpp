// Acceptance run: one PASS/FAIL line per criterion, plus a JSON report with
// the measured numbers. Exit code 0 only if every criterion passes.
//
// The stadium mode set is read from the spectrum cache (QERLAB_CACHE or the
// build cache) and computed on the first run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "qerlab/billiard.hpp"
#include "qerlab/diagnostics.hpp"
#include "qerlab/io.hpp"
#include "qerlab/pipeline.hpp"
#include "qerlab/semiclassics.hpp"

#ifndef QERLAB_DEFAULT_CACHE
#define QERLAB_DEFAULT_CACHE ".qerlab-cache"
#endif

using namespace qerlab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... v) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, v...);
    return buf;
}

json report = json::object();
int failures = 0;

void verdict(int id, bool pass, const std::string& summary, json details = json::object()) {
    std::printf("criterion %2d: %s  %s\n", id, pass ? "PASS" : "FAIL", summary.c_str());
    std::fflush(stdout);
    details["pass"] = pass;
    details["summary"] = summary;
    report[std::to_string(id)] = details;
    if (!pass) ++failures;
}

/// Runs one criterion; a library error fails that criterion and the run continues.
void guarded(int id, const std::function<void()>& body) {
    try {
        body();
    } catch (const Error& e) {
        verdict(id, false, std::string("error: ") + e.what());
    }
}

// Bessel references from std::cyl_bessel_j, independent of the GSL routines
// used by the library: sign changes on a fine grid, then bisection.
std::vector<double> roots_of(const std::function<double(double)>& f, double a, double b, double h = 1e-3) {
    std::vector<double> out;
    double x0 = a, f0 = f(a);
    for (double x1 = a + h; x1 <= b; x1 += h) {
        const double f1 = f(x1);
        if (f0 == 0.0) out.push_back(x0);
        else if ((f0 < 0) != (f1 < 0)) {
            double lo = x0, hi = x1, flo = f0;
            for (int i = 0; i < 80; ++i) {
                const double mid = 0.5 * (lo + hi), fm = f(mid);
                if ((fm < 0) == (flo < 0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            out.push_back(0.5 * (lo + hi));
        }
        x0 = x1;
        f0 = f1;
    }
    return out;
}

struct BesselLevel {
    double lambda;
    int m;
};

/// Unit-disc levels below lambda_max with multiplicity: zeros of J_m (Dirichlet) or J_m' (Neumann, nonzero).
std::vector<BesselLevel> disc_levels(BoundaryCondition bc, double lambda_max) {
    std::vector<BesselLevel> out;
    for (int m = 0; m < 200; ++m) {
        std::function<double(double)> f;
        if (bc == BoundaryCondition::dirichlet) {
            f = [m](double x) { return std::cyl_bessel_j(m, x); };
        } else {
            f = [m](double x) {
                return m == 0 ? -std::cyl_bessel_j(1, x) : 0.5 * (std::cyl_bessel_j(m - 1, x) - std::cyl_bessel_j(m + 1, x));
            };
        }
        const auto z = roots_of(f, 0.05, lambda_max);
        bool any = false;
        for (double x : z) {
            if (x < 0.5) continue;  // the trivial zero of J_m' at the origin
            any = true;
            out.push_back({x, m});
            if (m > 0) out.push_back({x, m});
        }
        if (!any && m > lambda_max + 2) break;
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.lambda < b.lambda; });
    return out;
}

int oracle_m(const std::vector<BesselLevel>& levels, double lambda, double tol = 1e-6) {
    int best = -1;
    double d = tol;
    for (const auto& l : levels)
        if (std::abs(l.lambda - lambda) < d) {
            d = std::abs(l.lambda - lambda);
            best = l.m;
        }
    return best;
}

double ratio_band(double v, double target) { return std::abs(v - target) / std::abs(target); }

// ---------------------------------------------------------------------------

void criterion_disc_spectrum(int id, BoundaryCondition bc, int want, double scan_hi) {
    const auto t0 = Clock::now();
    ScanOptions opt;
    opt.fixed_nodes = 256;
    const auto rep = spectrum_scan(Domain::disc(1.0), bc, bc == BoundaryCondition::neumann ? 0.5 : 0.0, scan_hi, opt);
    const double sec = seconds_since(t0);
    const auto ref = disc_levels(bc, scan_hi + 0.5);
    double err = 0.0;
    const int n = std::min<int>(want, static_cast<int>(std::min(rep.modes.size(), ref.size())));
    json rows = json::array();
    for (int i = 0; i < n; ++i) {
        err = std::max(err, std::abs(rep.modes[i].lambda - ref[i].lambda));
        rows.push_back({rep.modes[i].lambda, ref[i].lambda});
    }
    const bool pass = n == want && err < 1e-4 && (bc == BoundaryCondition::neumann || sec < 120.0);
    std::string extra;
    if (bc == BoundaryCondition::dirichlet) {
        int in_window = 0;
        for (const auto& l : ref) in_window += l.lambda <= 6.5;
        extra = fmt(", %d of the first %d lie in [0,6.5], runtime %.1fs at 256 nodes", in_window, want, sec);
    }
    verdict(id, pass, fmt("%d levels, max |lambda - Bessel zero| = %.2e (tol 1e-4)", n, err) + extra,
            json{{"max_error", err}, {"levels", rows}, {"seconds", sec}});
}

void criterion_billiard(int id) {
    const auto c1 = diag::circle_oracle(10000, 11);
    const auto c2 = diag::stadium_jacobian(1000, 12);
    verdict(id, c1.pass && c2.pass,
            fmt("circle max error %.2e (tol 1e-9); stadium max |det - 1| %.2e over %s (tol 1e-4)", c1.value, c2.value, c2.detail.c_str()),
            json{{"circle_max_error", c1.value}, {"stadium_jacobian_max_dev", c2.value}});
}

void criterion_midline(int id, const Domain& st, const InteriorCurve& mid) {
    double worst = 0.0;
    int regular = 0;
    for (std::uint64_t i = 0; regular < 1000 && i < 200000; ++i) {
        std::mt19937_64 rng(sample_seed(21, i));
        const auto x = uniform_phase_point(st, rng);
        for (const auto& r : transmission_map(st, mid, x)) {
            if (!r.regular()) continue;
            worst = std::max(worst, phase_distance(st, r.point, reflect_left_right(st, x)));
            ++regular;
        }
    }
    const auto cf = commutation_fraction(st, mid, 1, 1, 1e-3, 40000, 22);
    verdict(id, regular >= 1000 && worst < 1e-8 && cf.fraction > 0.98,
            fmt("max dist(beta_H, sigma_L) = %.2e over %d regular samples (tol 1e-8); commutation fraction(p=k=1, 1e-3) = %.4f over "
                "%llu used samples (> 0.98)",
                worst, regular, cf.fraction, static_cast<unsigned long long>(cf.n_used)),
            json{{"max_distance", worst}, {"fraction", cf.fraction}, {"n_used", cf.n_used}});
}

void criterion_anc(int id, const Domain& st, const InteriorCurve& tilt) {
    const std::vector<double> deltas{0.2, 0.1, 0.05, 0.025};
    bool pass = true;
    std::string s;
    json rows = json::array();
    for (auto [p, k] : std::vector<std::pair<int, int>>{{1, 1}, {1, 2}, {2, 1}}) {
        std::vector<double> f;
        for (double d : deltas) f.push_back(commutation_fraction(st, tilt, p, k, d, 200000, 31).fraction);
        const bool positive = std::all_of(f.begin(), f.end(), [](double v) { return v > 0.0; });
        const double slope = positive ? loglog_slope(deltas, f) : std::numeric_limits<double>::quiet_NaN();
        const bool ok = positive && std::abs(slope - 1.0) <= 0.3;
        pass = pass && ok;
        s += fmt("%s(p=%d,k=%d) slope %s", s.empty() ? "" : "; ", p, k,
                 positive ? fmt("%.2f", slope).c_str() : fmt("undefined, fraction %.3g at delta=0.2", f[0]).c_str());
        rows.push_back({{"p", p}, {"k", k}, {"fractions", f}, {"slope", nan_safe(slope)}});
    }
    verdict(id, pass, s + " (want 1.0 +- 0.3)", json{{"rows", rows}});
}

struct ModeSet {
    std::vector<EigenMode> modes;
    std::vector<CurveRecord> mid, tilt, circle;
};

void criterion_bimodal(int id, const ModeSet& S) {
    std::vector<double> v;
    for (const auto& r : S.mid) v.push_back(data_matrix_element(r, Symbol::one(), DataKind::dirichlet_data).real());
    const auto b = two_means(v);
    const bool pass = S.modes.size() >= 120 && b.low_mean < 1e-3 && std::abs(b.low_fraction - 0.5) <= 0.15;
    // informational: how much of the low cluster is numerically zero
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    const auto zeros = std::count_if(v.begin(), v.end(), [](double x) { return x < 1e-6; });
    const double low_median = b.split ? sorted[b.split / 2] : 0.0;
    verdict(id, pass,
            fmt("%zu modes; low cluster mean %.2e (< 1e-3), low fraction %.3f (0.5 +- 0.15), high mean %.3f, separation %.1f sd; "
                "low cluster median %.1e, %zd modes below 1e-6 (%.3f), low cluster max %.3f",
                S.modes.size(), b.low_mean, b.low_fraction, b.high_mean, b.statistic, low_median, zeros,
                static_cast<double>(zeros) / static_cast<double>(v.size()), b.split ? sorted[b.split - 1] : 0.0),
            json{{"n_modes", S.modes.size()}, {"low_mean", b.low_mean}, {"low_fraction", b.low_fraction}, {"high_mean", b.high_mean},
                 {"below_1e-6", zeros}});
}

std::vector<std::size_t> third_bounds(const std::vector<CurveRecord>& recs, double lo, double hi) {
    // indices where lambda crosses lo + (hi - lo) / 3 and lo + 2 (hi - lo) / 3, and the midpoint
    std::vector<std::size_t> b(3, recs.size());
    const double cut[3] = {lo + (hi - lo) / 3.0, lo + 2.0 * (hi - lo) / 3.0, 0.5 * (lo + hi)};
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < recs.size(); ++i)
            if (recs[i].lambda >= cut[c]) {
                b[c] = i;
                break;
            }
    return b;
}

void criterion_cauchy(int id, const Domain& st, const InteriorCurve& mid, const ModeSet& S, double lo, double hi) {
    std::vector<double> v;
    for (const auto& r : S.mid) v.push_back(cauchy_matrix_element(r.r, r.grid, Symbol::one()).real());
    const auto lit = predicted_cd_limit(st, mid, Symbol::one(), BoundaryCondition::neumann, 400000, 41, LimitConvention::transfer);
    const auto lw = predicted_cd_limit(st, mid, Symbol::one(), BoundaryCondition::neumann, 0, 0, LimitConvention::local_weyl);
    const auto b = third_bounds(S.mid, lo, hi);
    const double top = mean_of(v, b[1]);
    const double vb = cesaro_variance(v, lit.value, 0, b[2]), vt = cesaro_variance(v, lit.value, b[2]);
    const double r1 = mean_of(v, 0, b[0]) / lit.value, r2 = mean_of(v, b[0], b[1]) / lit.value, r3 = top / lit.value;
    const double offset_spread = std::max({r1, r2, r3}) / std::min({r1, r2, r3}) - 1.0;
    const bool near = ratio_band(top, lit.value) <= 0.25;
    const bool pass = near && vt < vb && offset_spread <= 0.10;
    verdict(id, pass,
            fmt("top-third mean %.4f vs predicted_cd_limit %.4f (rel %.2f, tol 0.25); local-Weyl value %.4f (rel %.3f); Cesaro V top/bottom "
                "half %.4g/%.4g; ratio to prediction by thirds %.3f %.3f %.3f (spread %.3f, tol 0.10)",
                top, lit.value, ratio_band(top, lit.value), lw.value, ratio_band(top, lw.value), vt, vb, r1, r2, r3, offset_spread),
            json{{"top_third_mean", top},
                 {"predicted_transfer", lit.value},
                 {"predicted_transfer_stderr", lit.stderr_},
                 {"predicted_local_weyl", lw.value},
                 {"cesaro_top", vt},
                 {"cesaro_bottom", vb},
                 {"third_ratios", {r1, r2, r3}}});
}

std::vector<std::size_t> nested_windows(std::size_t n) {
    std::vector<std::size_t> w(4);
    w[3] = n;
    for (int k = 2; k >= 0; --k) w[k] = static_cast<std::size_t>(std::floor(static_cast<double>(w[k + 1]) / 1.25));
    return w;
}

void criterion_dirichlet_trend(int id, const Domain& st, const InteriorCurve& tilt, const ModeSet& S, const Symbol& bump) {
    bool pass = true;
    std::string s;
    json rows = json::array();
    const auto win = nested_windows(S.tilt.size());
    const std::vector<std::pair<std::string, Symbol>> syms{{"a=1", Symbol::one()}, {"bump", bump}};
    for (const auto& [name, a] : syms) {
        std::vector<double> v;
        for (const auto& r : S.tilt) v.push_back(data_matrix_element(r, a, DataKind::dirichlet_data).real());
        const auto lit = predicted_limit(st, tilt, a, BoundaryCondition::neumann, DataKind::dirichlet_data, 400000, 51);
        const auto lw = predicted_limit(st, tilt, a, BoundaryCondition::neumann, DataKind::dirichlet_data, 0, 0, LimitConvention::local_weyl);
        std::vector<double> V;
        for (auto n : win) V.push_back(cesaro_variance(v, lit.value, 0, n));
        const bool mono = V[0] > V[1] && V[1] > V[2] && V[2] > V[3];
        const double final_mean = mean_of(v);
        const bool near = ratio_band(final_mean, lit.value) <= 0.30;
        pass = pass && mono && near;
        s += fmt("%s%s: V over N=%zu,%zu,%zu,%zu = %.4g,%.4g,%.4g,%.4g (%s); final mean %.4f vs %.4f (rel %.2f, tol 0.30), local-Weyl %.4f",
                 s.empty() ? "" : "; ", name.c_str(), win[0], win[1], win[2], win[3], V[0], V[1], V[2], V[3],
                 mono ? "decreasing" : "not decreasing", final_mean, lit.value, ratio_band(final_mean, lit.value), lw.value);
        rows.push_back({{"symbol", name},
                        {"windows", win},
                        {"cesaro", V},
                        {"final_mean", final_mean},
                        {"predicted_transfer", lit.value},
                        {"predicted_local_weyl", lw.value}});
    }
    verdict(id, pass, s, json{{"rows", rows}});
}

void criterion_restriction_norms(int id, const Domain& st, const InteriorCurve& tilt, const ModeSet& S, double lo, double hi) {
    std::vector<double> v;
    for (const auto& r : S.tilt) v.push_back(data_matrix_element(r, Symbol::one(), DataKind::dirichlet_data).real());
    const auto lit = predicted_limit(st, tilt, Symbol::one(), BoundaryCondition::neumann, DataKind::dirichlet_data, 400000, 51);
    const auto lw = predicted_limit(st, tilt, Symbol::one(), BoundaryCondition::neumann, DataKind::dirichlet_data, 0, 0,
                                    LimitConvention::local_weyl);
    const auto b = third_bounds(S.tilt, lo, hi);
    const double m = mean_of(v);
    double mn = std::numeric_limits<double>::infinity(), mx = 0.0;
    for (std::size_t i = b[1]; i < v.size(); ++i) {
        mn = std::min(mn, v[i] / lit.value);
        mx = std::max(mx, v[i] / lit.value);
    }
    const bool pass = ratio_band(m, lit.value) <= 0.30 && mn >= 0.2 && mx <= 5.0;
    verdict(id, pass,
            fmt("running mean %.4f vs c2*int(rho) %.4f (rel %.2f, tol 0.30); top third spans %.3f..%.3f x prediction (want 0.2..5); "
                "local-Weyl value %.4f gives %.3f..%.3f",
                m, lit.value, ratio_band(m, lit.value), mn, mx, lw.value, mn * lit.value / lw.value, mx * lit.value / lw.value),
            json{{"mean", m}, {"predicted_transfer", lit.value}, {"predicted_local_weyl", lw.value}, {"top_third_min_ratio", mn},
                 {"top_third_max_ratio", mx}});
}

void criterion_local_weyl(int id) {
    const json disc = json{{"shape", "disc"}, {"R", 1.0}};
    SpectrumRequest req;
    req.domain_spec = disc;
    req.bc = BoundaryCondition::neumann;
    req.lo = 1.8;
    req.hi = 30.0;
    req.normalize.rellich_only = true;
    const SpectrumCache cache = SpectrumCache::from_env(QERLAB_DEFAULT_CACHE);
    const auto res = obtain_spectrum(req, &cache);
    const Domain D = Domain::disc(1.0);
    const auto ref = disc_levels(BoundaryCondition::neumann, 30.5);
    const auto ref_count = static_cast<std::size_t>(
        std::count_if(ref.begin(), ref.end(), [&](const BesselLevel& l) { return l.lambda >= req.lo && l.lambda < req.hi; }));
    std::vector<double> lam, val;
    double oracle_dev = 0.0;
    int unmatched = 0;
    for (const auto& m : res.modes) {
        const double b = boundary_matrix_element(ModeField(D, m), [](double) { return 1.0; });
        lam.push_back(m.lambda);
        val.push_back(b);
        const int mm = oracle_m(ref, m.lambda);
        if (mm < 0) {
            ++unmatched;
            continue;
        }
        const double exact = 2.0 * m.lambda * m.lambda / (m.lambda * m.lambda - mm * mm);
        oracle_dev = std::max(oracle_dev, std::abs(b - exact) / exact);
    }
    // interior-quadrature spot check of the normalization on a few modes
    double spot = 0.0;
    for (std::size_t i = 0; i < res.modes.size(); i += std::max<std::size_t>(1, res.modes.size() / 4)) {
        const double n2 = interior_norm2(ModeField(D, res.modes[i]));
        spot = std::max(spot, std::abs(n2 - 1.0));
    }
    const auto rows = weyl_average(lam, val, 4.0);
    const double end = rows.empty() ? 0.0 : rows.back().running_avg;
    const double target = predicted_boundary_limit(D, [](double, double) { return 1.0; }, BoundaryCondition::neumann);
    const bool pass = ratio_band(end, 4.0) <= 0.10 && res.modes.size() == ref_count;
    verdict(id, pass,
            fmt("%zu modes (Bessel count %zu); running average at lambda=%.2f is %.4f vs 4.0 (rel %.3f, tol 0.10); boundary-limit "
                "integral %.4f; max deviation from closed-form Bessel norms %.1e (%d unmatched); interior-norm spot check %.1e",
                res.modes.size(), ref_count, lam.empty() ? 0.0 : rows.back().lambda, end, ratio_band(end, 4.0), target, oracle_dev,
                unmatched, spot),
            json{{"n_modes", res.modes.size()}, {"running_avg_end", end}, {"oracle_max_rel_dev", oracle_dev}, {"spot_check", spot}});
}

void criterion_tangential(int id, const ModeSet& S) {
    const std::vector<double> eps{0.2, 0.1, 0.05};
    std::vector<CurveRestriction> rs;
    std::vector<CurveGrid> gs;
    for (const auto& r : S.circle) {
        rs.push_back(r.r);
        gs.push_back(r.grid);
    }
    std::vector<double> mass;
    for (double e : eps) mass.push_back(tangential_mass(rs, gs, e));
    const double slope = loglog_slope(eps, mass);
    verdict(id, slope >= 0.5 && mass[0] > mass[1] && mass[1] > mass[2],
            fmt("mean ||Op(chi_eps) u^H||^2 at eps 0.2/0.1/0.05 = %.4g/%.4g/%.4g over %zu modes, log-log slope %.3f (>= 0.5)", mass[0],
                mass[1], mass[2], rs.size(), slope),
            json{{"mass", mass}, {"slope", slope}});
}

void criterion_nodal(int id, const Domain& st, const InteriorCurve& tilt, const ModeSet& S) {
    // disc: exact 2m sign changes on a concentric circle
    SpectrumRequest req;
    req.domain_spec = json{{"shape", "disc"}, {"R", 1.0}};
    req.bc = BoundaryCondition::dirichlet;
    req.lo = 0.0;
    req.hi = 20.0;
    req.normalize.rellich_only = true;
    const SpectrumCache cache = SpectrumCache::from_env(QERLAB_DEFAULT_CACHE);
    const auto res = obtain_spectrum(req, &cache);
    const Domain D = Domain::disc(1.0);
    const auto ref = disc_levels(BoundaryCondition::dirichlet, 20.5);
    const double rad = 0.5;
    const auto C = InteriorCurve::circle({0.0, 0.0}, rad);
    int checked = 0, exact = 0, skipped = 0;
    double residue = 0.0;
    for (const auto& m : res.modes) {
        const int mm = oracle_m(ref, m.lambda);
        if (mm < 0) {
            ++skipped;
            continue;
        }
        // a radial node on the circle leaves no angular structure to count
        double peak = 0.0;
        for (int i = 1; i <= 400; ++i) peak = std::max(peak, std::abs(std::cyl_bessel_j(mm, m.lambda * i / 400.0)));
        if (std::abs(std::cyl_bessel_j(mm, m.lambda * rad)) < 0.05 * peak) {
            ++skipped;
            continue;
        }
        const auto n = nodal_intersections(ModeField(D, m), C);
        ++checked;
        exact += n.count == 2 * mm;
        residue = std::max(residue, n.imag_residue);
    }
    // stadium: count / lambda on the tilted segment
    double cmin = std::numeric_limits<double>::infinity(), cmax = 0.0;
    int zero_traces = 0;
    std::vector<double> ratios;
    for (const auto& m : S.modes) {
        try {
            const auto n = nodal_intersections(ModeField(st, m), tilt);
            residue = std::max(residue, n.imag_residue);
            const double c = n.count / m.lambda;
            ratios.push_back(c);
            cmin = std::min(cmin, c);
            cmax = std::max(cmax, c);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::ZeroTrace) throw;
            ++zero_traces;
        }
    }
    std::sort(ratios.begin(), ratios.end());
    const auto pct = [&](double q) { return ratios.empty() ? 0.0 : ratios[static_cast<std::size_t>(q * (ratios.size() - 1))]; };
    const double band = cmax / cmin;
    const bool pass = checked > 0 && exact == checked && band <= 4.0;
    verdict(id, pass,
            fmt("disc: %d/%d modes give exactly 2m sign changes on r=%.1f (%d skipped at radial nodes); stadium: count/lambda in "
                "[%.3f, %.3f], ratio %.2f (tol 4), 5-95%% band [%.3f, %.3f], %d zero traces; max gauge residue %.1e",
                exact, checked, rad, skipped, cmin, cmax, band, pct(0.05), pct(0.95), zero_traces, residue),
            json{{"disc_checked", checked}, {"disc_exact", exact}, {"c_min", cmin}, {"c_max", cmax}, {"band", band}});
}

void criterion_properties(int id) {
    const auto t0 = Clock::now();
    DiagOptions opt;
    opt.seed = 61;
    const auto checks = run_diagnostics(opt);
    const double sec = seconds_since(t0);
    const std::vector<std::string> wanted{"quantize_identity_max_error", "quantize_multiplication_max_error",
                                          "quantize_tau_fourier_max_error", "selfadjoint_decay_exponent", "wronskian_max_relative",
                                          "pushforward_mc_vs_quadrature_max_sigma"};
    bool pass = sec < 600.0 && all_pass(checks);
    std::string s;
    json rows = json::array();
    for (const auto& c : checks) {
        rows.push_back({{"name", c.name}, {"value", nan_safe(c.value)}, {"threshold", c.threshold}, {"pass", c.pass},
                        {"informational", c.informational}});
        if (std::find(wanted.begin(), wanted.end(), c.name) != wanted.end())
            s += fmt("%s%s %.3g %s", s.empty() ? "" : "; ", c.name.c_str(), c.value, c.pass ? "ok" : "FAILED");
    }
    verdict(id, pass, s + fmt("; whole diag suite %s in %.0fs (< 600s)", all_pass(checks) ? "green" : "NOT green", sec),
            json{{"checks", rows}, {"seconds", sec}});
}

}  // namespace

int main() {
    const auto t0 = Clock::now();
    const json stadium_spec = json{{"a", 1.0}, {"r", 1.0}, {"shape", "stadium"}};
    const Domain st = domain_from_json(stadium_spec);
    const auto mid = InteriorCurve::segment({0.0, -0.85}, {0.0, 0.85});
    const auto tilt = InteriorCurve::segment({-1.5, -0.45}, {1.3, 0.6});
    const auto circle = InteriorCurve::circle({0.0, 0.0}, 0.5);
    const double lo = 20.0, hi = 55.0;

    try {
        guarded(1, [&] { criterion_disc_spectrum(1, BoundaryCondition::dirichlet, 10, 7.1); });
        guarded(2, [&] { criterion_disc_spectrum(2, BoundaryCondition::neumann, 8, 5.5); });
        guarded(3, [&] { criterion_billiard(3); });
        guarded(4, [&] { criterion_midline(4, st, mid); });
        guarded(5, [&] { criterion_anc(5, st, tilt); });

        SpectrumRequest req;
        req.domain_spec = stadium_spec;
        req.bc = BoundaryCondition::neumann;
        req.lo = lo;
        req.hi = hi;
        req.scan.points_per_wavelength = 6.0;
        req.scan.lambda_tol = 1e-8;
        req.normalize.rellich_only = true;
        const SpectrumCache cache = SpectrumCache::from_env(QERLAB_DEFAULT_CACHE);
        const auto ts = Clock::now();
        ModeSet S;
        {
            auto res = obtain_spectrum(req, &cache);
            S.modes = std::move(res.modes);
            std::printf("# stadium Neumann modes in [%.0f, %.0f]: %zu (%s, %.0fs)\n", lo, hi, S.modes.size(),
                        res.from_cache ? "cache" : "computed", seconds_since(ts));
        }
        S.mid = restrict_modes(st, S.modes, mid);
        S.tilt = restrict_modes(st, S.modes, tilt);
        S.circle = restrict_modes(st, S.modes, circle);
        std::printf("# restrictions to midline, tilted segment and circle: %.0fs\n", seconds_since(ts));
        std::fflush(stdout);

        guarded(6, [&] { criterion_bimodal(6, S); });
        guarded(7, [&] { criterion_cauchy(7, st, mid, S, lo, hi); });
        const Symbol bump = Symbol::gaussian_bump(0.5 * tilt.length(), 0.3);
        guarded(8, [&] { criterion_dirichlet_trend(8, st, tilt, S, bump); });
        guarded(9, [&] { criterion_restriction_norms(9, st, tilt, S, lo, hi); });
        guarded(10, [&] { criterion_local_weyl(10); });
        guarded(11, [&] { criterion_tangential(11, S); });
        guarded(12, [&] { criterion_nodal(12, st, tilt, S); });
        guarded(13, [&] { criterion_properties(13); });
    } catch (const Error& e) {
        std::printf("acceptance aborted: %s\n", e.what());
        return 2;
    }
    std::printf("# %d of 13 criteria failed; total %.0fs\n", failures, seconds_since(t0));
    report["failures"] = failures;
    std::ofstream("acceptance_report.json") << report.dump(2) << "\n";
    return failures == 0 ? 0 : 1;
}
