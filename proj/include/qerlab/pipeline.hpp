#pragma once

// Scan-normalize-cache and restriction helpers shared by the CLI and the
// acceptance driver.

#include <cmath>
#include <cstdint>
#include <set>
#include <optional>
#include <string>
#include <vector>

#include "qerlab/eigenmode.hpp"
#include "qerlab/io.hpp"
#include "qerlab/semiclassics.hpp"
#include "qerlab/spectrum.hpp"

namespace qerlab {

struct SpectrumRequest {
    json domain_spec;
    BoundaryCondition bc = BoundaryCondition::neumann;
    double lo = 0.0;
    double hi = 1.0;
    ScanOptions scan;
    NormalizeOptions normalize;
};

struct SpectrumResult {
    std::vector<EigenMode> modes;   // normalized, sorted by lambda
    std::vector<std::string> warnings;
    bool from_cache = false;
    std::string domain_hash;
};

namespace detail {

inline json spectrum_key(const SpectrumRequest& req) {
    json key = SpectrumCache::scan_key(req.bc, req.lo, req.hi, req.scan);
    key["rellich_only"] = req.normalize.rellich_only;
    return key;
}

inline void scan_and_normalize(const Domain& domain, const SpectrumRequest& req, SpectrumResult& res) {
    ScanReport rep = spectrum_scan(domain, req.bc, req.lo, req.hi, req.scan);
    res.warnings.insert(res.warnings.end(), rep.warnings.begin(), rep.warnings.end());
    for (auto& m : rep.modes) {
        m.domain_hash = res.domain_hash;
        try {
            res.modes.push_back(normalize_mode(domain, m, req.normalize));
        } catch (const Error& e) {
            res.warnings.push_back(std::string("dropped mode: ") + e.what());
        }
    }
}

}  // namespace detail

/// Normalized modes for a request, read from the cache when present and
/// written to it otherwise. Modes whose normalization fails are dropped with a
/// warning. With a cache, a window spanning several grid chunks is also stored
/// chunk by chunk, so an interrupted scan resumes at the first missing chunk.
inline SpectrumResult obtain_spectrum(const SpectrumRequest& req, const SpectrumCache* cache) {
    SpectrumResult res;
    res.domain_hash = domain_hash(req.domain_spec);
    const json key = detail::spectrum_key(req);
    if (cache) {
        if (auto hit = cache->load(res.domain_hash, req.bc, key)) {
            res.modes = std::move(*hit);
            res.from_cache = true;
            return res;
        }
    }
    const Domain domain = domain_from_json(req.domain_spec);
    const double start = scan_start(domain, req.bc, req.lo);
    const auto chunks = start < req.hi ? plan_chunks(domain, start, req.hi, req.scan) : std::vector<ScanChunk>{};
    if (!cache || chunks.size() < 2) {
        detail::scan_and_normalize(domain, req, res);
    } else {
        for (const auto& ch : chunks) {
            SpectrumRequest sub = req;
            sub.lo = ch.a;
            sub.hi = ch.b;
            const json sub_key = detail::spectrum_key(sub);
            SpectrumResult part;
            part.domain_hash = res.domain_hash;
            if (auto hit = cache->load(res.domain_hash, req.bc, sub_key)) {
                part.modes = std::move(*hit);
            } else {
                detail::scan_and_normalize(domain, sub, part);
                cache->store(res.domain_hash, req.bc, sub_key, part.modes, part.warnings);
            }
            for (auto& m : part.modes) res.modes.push_back(std::move(m));
            res.warnings.insert(res.warnings.end(), part.warnings.begin(), part.warnings.end());
        }
    }
    if (cache) cache->store(res.domain_hash, req.bc, key, res.modes, res.warnings);
    return res;
}


// ---------------------------------------------------------------------------
// Experiment configuration

/// Everything a subcommand needs, validated before any compute. Keys:
///   domain (required), curve, bc ("neumann" | "dirichlet"), window [lo, hi],
///   points_per_wavelength, grading, lambda_tol, normalization ("rellich" | "interior"),
///   symbol, data ("dirichlet" | "neumann"), convention ("transfer" | "local_weyl"),
///   mc_samples, seed, threads, out,
///   anc {pairs [[p, k], ...], deltas [...], samples}.
struct ExperimentConfig {
    json raw;
    std::string hash;
    json domain_spec;
    std::optional<json> curve_spec;
    BoundaryCondition bc = BoundaryCondition::neumann;
    double lo = 1.0;
    double hi = 10.0;
    ScanOptions scan;
    NormalizeOptions normalize;
    json symbol_spec = json{{"kind", "one"}};
    DataKind data = DataKind::dirichlet_data;
    LimitConvention convention = LimitConvention::transfer;
    std::uint64_t mc_samples = 200000;
    std::optional<std::uint64_t> seed;
    int threads = 1;
    std::string out = ".";
    std::vector<std::pair<int, int>> anc_pairs{{1, 1}, {1, 2}, {2, 1}};
    std::vector<double> anc_deltas{0.2, 0.1, 0.05, 0.025};
    std::uint64_t anc_samples = 100000;
};

inline std::string lower_enum(const json& j, const std::string& key, const std::set<std::string>& allowed) {
    const std::string v = get_string(j, key, "config");
    if (!allowed.count(v)) {
        std::string opts;
        for (const auto& a : allowed) opts += (opts.empty() ? "" : ", ") + a;
        fail(ErrorKind::InvalidConfig, "config." + key + " must be one of " + opts);
    }
    return v;
}

inline std::uint64_t get_count(const json& j, const std::string& key, const std::string& what) {
    const double v = get_number(j, key, what);
    if (!(v >= 1.0) || v != std::floor(v) || v > 1e15) fail(ErrorKind::InvalidConfig, what + "." + key + " must be a positive integer");
    return static_cast<std::uint64_t>(v);
}

inline ExperimentConfig parse_experiment_config(const json& j) {
    require_keys(j, {"domain", "curve", "bc", "window", "points_per_wavelength", "grading", "lambda_tol", "normalization", "symbol",
                     "data", "convention", "mc_samples", "seed", "threads", "out", "anc"},
                 "config");
    ExperimentConfig c;
    c.raw = j;
    c.hash = fnv1a_hex(j.dump());
    if (!j.contains("domain")) fail(ErrorKind::InvalidConfig, "config is missing 'domain'");
    c.domain_spec = j.at("domain");
    (void)domain_from_json(c.domain_spec);
    if (j.contains("curve")) {
        c.curve_spec = j.at("curve");
        (void)curve_from_json(*c.curve_spec);
    }
    if (j.contains("bc")) c.bc = lower_enum(j, "bc", {"neumann", "dirichlet"}) == "neumann" ? BoundaryCondition::neumann : BoundaryCondition::dirichlet;
    if (j.contains("window")) {
        const auto& w = j.at("window");
        if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !w[1].is_number())
            fail(ErrorKind::InvalidConfig, "config.window must be [lo, hi]");
        c.lo = w[0].get<double>();
        c.hi = w[1].get<double>();
        if (!(c.lo >= 0.0 && c.hi > c.lo)) fail(ErrorKind::InvalidConfig, "config.window must satisfy 0 <= lo < hi");
    }
    c.scan.points_per_wavelength = get_number_or(j, "points_per_wavelength", c.scan.points_per_wavelength, "config");
    if (!(c.scan.points_per_wavelength > 0.0)) fail(ErrorKind::InvalidConfig, "config.points_per_wavelength must be positive");
    if (j.contains("grading")) {
        try {
            c.scan.grading = parse_grading(get_string(j, "grading", "config"));
        } catch (const Error& e) {
            fail(ErrorKind::InvalidConfig, e.what());
        }
    }
    c.scan.lambda_tol = get_number_or(j, "lambda_tol", c.scan.lambda_tol, "config");
    if (j.contains("normalization")) c.normalize.rellich_only = lower_enum(j, "normalization", {"rellich", "interior"}) == "rellich";
    if (j.contains("symbol")) {
        c.symbol_spec = j.at("symbol");
        (void)symbol_from_json(c.symbol_spec);
    }
    if (j.contains("data")) c.data = lower_enum(j, "data", {"dirichlet", "neumann"}) == "dirichlet" ? DataKind::dirichlet_data : DataKind::neumann_data;
    if (j.contains("convention"))
        c.convention = lower_enum(j, "convention", {"transfer", "local_weyl"}) == "transfer" ? LimitConvention::transfer : LimitConvention::local_weyl;
    if (j.contains("mc_samples")) c.mc_samples = get_count(j, "mc_samples", "config");
    if (j.contains("seed")) {
        const double v = get_number(j, "seed", "config");
        if (!(v >= 0.0) || v != std::floor(v)) fail(ErrorKind::InvalidConfig, "config.seed must be a non-negative integer");
        c.seed = static_cast<std::uint64_t>(v);
    }
    if (j.contains("threads")) c.threads = static_cast<int>(get_count(j, "threads", "config"));
    if (j.contains("out")) c.out = get_string(j, "out", "config");
    if (j.contains("anc")) {
        const json& a = j.at("anc");
        require_keys(a, {"pairs", "deltas", "samples"}, "config.anc");
        if (a.contains("pairs")) {
            c.anc_pairs.clear();
            for (const auto& pk : a.at("pairs")) {
                if (!pk.is_array() || pk.size() != 2 || !pk[0].is_number_integer() || !pk[1].is_number_integer())
                    fail(ErrorKind::InvalidConfig, "config.anc.pairs entries must be [p, k] integers");
                c.anc_pairs.emplace_back(pk[0].get<int>(), pk[1].get<int>());
            }
        }
        if (a.contains("deltas")) {
            c.anc_deltas.clear();
            for (const auto& d : a.at("deltas")) {
                if (!d.is_number() || !(d.get<double>() > 0.0)) fail(ErrorKind::InvalidConfig, "config.anc.deltas must be positive numbers");
                c.anc_deltas.push_back(d.get<double>());
            }
        }
        if (a.contains("samples")) c.anc_samples = get_count(a, "samples", "config.anc");
    }
    c.scan.threads = c.threads;
    c.normalize.threads = c.threads;
    return c;
}

inline SpectrumRequest spectrum_request(const ExperimentConfig& c) {
    SpectrumRequest r;
    r.domain_spec = c.domain_spec;
    r.bc = c.bc;
    r.lo = c.lo;
    r.hi = c.hi;
    r.scan = c.scan;
    r.normalize = c.normalize;
    return r;
}

inline InteriorCurve require_curve(const ExperimentConfig& c) {
    if (!c.curve_spec) fail(ErrorKind::InvalidConfig, "this command needs config.curve");
    return curve_from_json(*c.curve_spec);
}

inline std::uint64_t require_seed(const ExperimentConfig& c) {
    if (!c.seed) fail(ErrorKind::InvalidConfig, "Monte-Carlo commands need a seed (config.seed or --seed)");
    return *c.seed;
}

/// Symbol from the config, periodized on closed curves.
inline Symbol config_symbol(const ExperimentConfig& c, const InteriorCurve& H) {
    return symbol_from_json(c.symbol_spec, H.closed() ? H.length() : 0.0);
}

// ---------------------------------------------------------------------------
// Restriction of a mode set to a curve

struct CurveRecord {
    double lambda = 0.0;
    CurveGrid grid;
    CurveRestriction r;
};

/// Cauchy data of every mode on H, on grids resolving each mode's wavelength.
inline std::vector<CurveRecord> restrict_modes(const Domain& domain, const std::vector<EigenMode>& modes, const InteriorCurve& H,
                                               int threads = 1, double per_wavelength = 8.0) {
    std::vector<CurveRecord> out;
    out.reserve(modes.size());
    for (const auto& m : modes) {
        const ModeField field(domain, m);
        CurveRecord rec;
        rec.lambda = m.lambda;
        rec.grid = curve_grid_for(H, m.lambda, per_wavelength);
        rec.r = restrict_cauchy_data(field, H, rec.grid, threads);
        out.push_back(std::move(rec));
    }
    return out;
}

/// <Op(a) g, g> for the chosen data.
inline cplx data_matrix_element(const CurveRecord& rec, const Symbol& a, DataKind data) {
    const auto& g = data == DataKind::dirichlet_data ? rec.r.value : rec.r.normal;
    return matrix_element(g, rec.grid, rec.lambda, a);
}

}  // namespace qerlab
