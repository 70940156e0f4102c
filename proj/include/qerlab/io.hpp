#pragma once

// JSON descriptions of domains, curves and symbols, the on-disk spectrum
// cache, and CSV output.

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qerlab/errors.hpp"
#include "qerlab/geometry.hpp"
#include "qerlab/layer.hpp"
#include "qerlab/semiclassics.hpp"
#include "qerlab/spectrum.hpp"

namespace qerlab {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Validation helpers

/// Throws InvalidConfig if `j` is not an object or has keys outside `allowed`.
inline void require_keys(const json& j, const std::set<std::string>& allowed, const std::string& what) {
    if (!j.is_object()) fail(ErrorKind::InvalidConfig, what + " must be a JSON object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) fail(ErrorKind::InvalidConfig, "unknown key '" + k + "' in " + what);
}

inline double get_number(const json& j, const std::string& key, const std::string& what) {
    if (!j.contains(key)) fail(ErrorKind::InvalidConfig, what + " is missing '" + key + "'");
    if (!j.at(key).is_number()) fail(ErrorKind::InvalidConfig, what + "." + key + " must be a number");
    return j.at(key).get<double>();
}

inline double get_number_or(const json& j, const std::string& key, double def, const std::string& what) {
    return j.contains(key) ? get_number(j, key, what) : def;
}

inline Vec2 get_point(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        fail(ErrorKind::InvalidConfig, what + " must be a pair [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline std::vector<Vec2> get_points(const json& j, const std::string& key, const std::string& what) {
    if (!j.contains(key) || !j.at(key).is_array()) fail(ErrorKind::InvalidConfig, what + "." + key + " must be an array of points");
    std::vector<Vec2> pts;
    for (const auto& p : j.at(key)) pts.push_back(get_point(p, what + "." + key + "[]"));
    return pts;
}

inline std::string get_string(const json& j, const std::string& key, const std::string& what) {
    if (!j.contains(key) || !j.at(key).is_string()) fail(ErrorKind::InvalidConfig, what + "." + key + " must be a string");
    return j.at(key).get<std::string>();
}

// ---------------------------------------------------------------------------
// Domains, curves, symbols

inline Domain domain_from_json(const json& j) {
    const std::string what = "domain";
    const std::string shape = get_string(j, "shape", what);
    if (shape == "disc") {
        require_keys(j, {"shape", "R"}, what);
        return Domain::disc(get_number_or(j, "R", 1.0, what));
    }
    if (shape == "stadium") {
        require_keys(j, {"shape", "a", "r"}, what);
        return Domain::stadium(get_number(j, "a", what), get_number(j, "r", what));
    }
    if (shape == "polygon") {
        require_keys(j, {"shape", "vertices"}, what);
        return Domain::polygon(get_points(j, "vertices", what));
    }
    if (shape == "cardioid") {
        require_keys(j, {"shape", "a"}, what);
        return Domain::cardioid(get_number_or(j, "a", 1.0, what));
    }
    if (shape == "spline") {
        require_keys(j, {"shape", "points", "closed"}, what);
        if (j.contains("closed") && !j.at("closed").get<bool>()) fail(ErrorKind::InvalidConfig, "a domain spline must be closed");
        return Domain::spline(get_points(j, "points", what));
    }
    fail(ErrorKind::InvalidConfig, "unknown domain shape '" + shape + "'");
}

inline int normal_side_from_json(const json& j, const std::string& what) {
    if (!j.contains("normal_side")) return 1;
    const std::string s = get_string(j, "normal_side", what);
    if (s == "left") return 1;
    if (s == "right") return -1;
    fail(ErrorKind::InvalidConfig, what + ".normal_side must be 'left' or 'right'");
}

inline InteriorCurve curve_from_json(const json& j) {
    const std::string what = "curve";
    const std::string shape = get_string(j, "shape", what);
    if (shape == "segment") {
        require_keys(j, {"shape", "a", "b", "normal_side"}, what);
        return InteriorCurve::segment(get_point(j.at("a"), "curve.a"), get_point(j.at("b"), "curve.b"), normal_side_from_json(j, what));
    }
    if (shape == "circle") {
        require_keys(j, {"shape", "center", "r", "normal_side"}, what);
        const Vec2 c = j.contains("center") ? get_point(j.at("center"), "curve.center") : Vec2{0.0, 0.0};
        return InteriorCurve::circle(c, get_number(j, "r", what), normal_side_from_json(j, what));
    }
    if (shape == "ellipse") {
        require_keys(j, {"shape", "center", "ax", "by", "normal_side"}, what);
        const Vec2 c = j.contains("center") ? get_point(j.at("center"), "curve.center") : Vec2{0.0, 0.0};
        return InteriorCurve::ellipse(c, get_number(j, "ax", what), get_number(j, "by", what), normal_side_from_json(j, what));
    }
    if (shape == "spline") {
        require_keys(j, {"shape", "points", "closed", "normal_side"}, what);
        const bool closed = j.contains("closed") ? j.at("closed").get<bool>() : false;
        return InteriorCurve::spline(get_points(j, "points", what), closed, normal_side_from_json(j, what));
    }
    fail(ErrorKind::InvalidConfig, "unknown curve shape '" + shape + "'");
}

/// {"kind":"one"}, {"kind":"zero"}, {"kind":"tau"},
/// {"kind":"gaussian_bump","s0":..,"width":..[,"tau0":..,"tau_width":..]},
/// {"kind":"tangential_cutoff","epsilon":..}. `period` > 0 for closed curves.
inline Symbol symbol_from_json(const json& j, double period = 0.0) {
    const std::string what = "symbol";
    const std::string kind = get_string(j, "kind", what);
    if (kind == "one") {
        require_keys(j, {"kind"}, what);
        return Symbol::one();
    }
    if (kind == "zero") {
        require_keys(j, {"kind"}, what);
        return Symbol::zero();
    }
    if (kind == "tau") {
        require_keys(j, {"kind"}, what);
        return Symbol::tau();
    }
    if (kind == "gaussian_bump") {
        require_keys(j, {"kind", "s0", "width", "tau0", "tau_width"}, what);
        return Symbol::gaussian_bump(get_number(j, "s0", what), get_number(j, "width", what), get_number_or(j, "tau0", 0.0, what),
                                     get_number_or(j, "tau_width", std::numeric_limits<double>::infinity(), what), period);
    }
    if (kind == "tangential_cutoff") {
        require_keys(j, {"kind", "epsilon"}, what);
        return Symbol::tangential_cutoff(get_number(j, "epsilon", what));
    }
    fail(ErrorKind::InvalidConfig, "unknown symbol kind '" + kind + "'");
}

/// FNV-1a 64 of a string, as 16 hex digits.
inline std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

/// Stable hash of a domain description (keys sorted, numbers in shortest form).
inline std::string domain_hash(const json& domain_spec) { return fnv1a_hex(domain_spec.dump()); }

// ---------------------------------------------------------------------------
// Files

/// Writes through a temporary file in the same directory and renames it into place.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    const auto tmp = path.string() + ".tmp" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count());
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) fail(ErrorKind::Io, "cannot write " + tmp);
        out << content;
        if (!out) fail(ErrorKind::Io, "write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) fail(ErrorKind::Io, "cannot rename into " + path.string() + ": " + ec.message());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json read_json(const std::filesystem::path& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::exception& e) {
        fail(ErrorKind::InvalidConfig, path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Modes

inline const char* grading_name(GridGrading g) {
    switch (g) {
        case GridGrading::automatic: return "automatic";
        case GridGrading::uniform: return "uniform";
        case GridGrading::corners: return "corners";
    }
    return "automatic";
}

inline GridGrading parse_grading(const std::string& s) {
    if (s == "automatic") return GridGrading::automatic;
    if (s == "uniform") return GridGrading::uniform;
    if (s == "corners") return GridGrading::corners;
    fail(ErrorKind::InvalidConfig, "unknown grid grading '" + s + "'");
}

inline json nan_safe(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }
inline double nan_from(const json& j) { return j.is_number() ? j.get<double>() : std::numeric_limits<double>::quiet_NaN(); }

inline json mode_to_json(const EigenMode& m) {
    json j;
    j["lambda"] = m.lambda;
    j["bc"] = bc_name(m.bc);
    j["domain_hash"] = m.domain_hash;
    j["nodes"] = m.n_nodes;
    j["grading"] = grading_name(m.grading);
    std::vector<double> re, im;
    for (const auto& u : m.trace) {
        re.push_back(u.real());
        im.push_back(u.imag());
    }
    j["trace_re"] = re;
    j["trace_im"] = im;
    j["residual"] = m.residual;
    j["second_singular"] = m.second_singular;
    j["leakage"] = m.leakage;
    j["imag_residue"] = m.imag_residue;
    j["symmetry"] = {{"py", m.symmetry.py}, {"px", m.symmetry.px}};
    j["norm_checks"] = {{"normalized", m.normalized},
                        {"norm_interior", nan_safe(m.norm_interior)},
                        {"norm_rellich", nan_safe(m.norm_rellich)},
                        {"discrepancy", nan_safe(m.normalization_discrepancy)}};
    return j;
}

inline EigenMode mode_from_json(const json& j) {
    EigenMode m;
    try {
        m.lambda = j.at("lambda").get<double>();
        m.bc = parse_bc(j.at("bc").get<std::string>());
        m.domain_hash = j.at("domain_hash").get<std::string>();
        m.n_nodes = j.at("nodes").get<int>();
        m.grading = parse_grading(j.value("grading", std::string("automatic")));
        const auto re = j.at("trace_re").get<std::vector<double>>();
        const auto im = j.at("trace_im").get<std::vector<double>>();
        if (re.size() != im.size()) fail(ErrorKind::InvalidConfig, "trace_re and trace_im differ in length");
        for (std::size_t i = 0; i < re.size(); ++i) m.trace.emplace_back(re[i], im[i]);
        m.residual = j.at("residual").get<double>();
        m.second_singular = j.value("second_singular", 0.0);
        m.leakage = j.value("leakage", 0.0);
        m.imag_residue = j.value("imag_residue", 0.0);
        if (j.contains("symmetry")) {
            m.symmetry.py = j["symmetry"].value("py", 0);
            m.symmetry.px = j["symmetry"].value("px", 0);
        }
        const json& nc = j.at("norm_checks");
        m.normalized = nc.value("normalized", false);
        m.norm_interior = nan_from(nc.value("norm_interior", json(nullptr)));
        m.norm_rellich = nan_from(nc.value("norm_rellich", json(nullptr)));
        m.normalization_discrepancy = nan_from(nc.value("discrepancy", json(nullptr)));
    } catch (const json::exception& e) {
        fail(ErrorKind::InvalidConfig, std::string("malformed mode record: ") + e.what());
    }
    return m;
}

// ---------------------------------------------------------------------------
// Spectrum cache
//
// <root>/<domain_hash>/<bc>/<scan key>/manifest.json and mode_NNNNN.json.
// The scan key hashes the window and every option that changes the result.

class SpectrumCache {
public:
    /// Bumped whenever the scan can return different levels for the same options.
    static constexpr int scan_revision = 2;

    explicit SpectrumCache(std::filesystem::path root) : root_(std::move(root)) {}

    /// QERLAB_CACHE if set, otherwise `fallback`.
    static SpectrumCache from_env(const std::filesystem::path& fallback) {
        if (const char* env = std::getenv("QERLAB_CACHE"); env && *env) return SpectrumCache(env);
        return SpectrumCache(fallback);
    }

    const std::filesystem::path& root() const { return root_; }

    static json scan_key(BoundaryCondition bc, double lo, double hi, const ScanOptions& opt) {
        return json{{"revision", scan_revision},
                    {"bc", bc_name(bc)},
                    {"lo", lo},
                    {"hi", hi},
                    {"ppw", opt.points_per_wavelength},
                    {"fixed_nodes", opt.fixed_nodes},
                    {"step_fraction", opt.step_fraction},
                    {"max_step", opt.max_step},
                    {"lambda_tol", opt.lambda_tol},
                    {"residual_tol", opt.residual_tol},
                    {"leakage_tol", opt.leakage_tol},
                    {"grid_growth", opt.grid_growth},
                    {"grading", grading_name(opt.grading)},
                    {"use_symmetry", opt.use_symmetry}};
    }

    std::filesystem::path scan_dir(const std::string& dhash, BoundaryCondition bc, const json& key) const {
        return root_ / dhash / bc_name(bc) / fnv1a_hex(key.dump());
    }

    /// Cached modes of a scan, or nullopt. CacheMismatch if a record belongs to another domain.
    std::optional<std::vector<EigenMode>> load(const std::string& dhash, BoundaryCondition bc, const json& key) const {
        const auto dir = scan_dir(dhash, bc, key);
        const auto manifest = dir / "manifest.json";
        if (!std::filesystem::exists(manifest)) return std::nullopt;
        const json man = read_json(manifest);
        if (man.value("domain_hash", std::string()) != dhash)
            fail(ErrorKind::CacheMismatch, "manifest " + manifest.string() + " belongs to domain " + man.value("domain_hash", std::string()));
        std::vector<EigenMode> modes;
        for (const auto& f : man.at("modes")) {
            EigenMode m = mode_from_json(read_json(dir / f.get<std::string>()));
            if (m.domain_hash != dhash)
                fail(ErrorKind::CacheMismatch, "cached mode at lambda=" + std::to_string(m.lambda) + " has domain hash " + m.domain_hash +
                                                   ", config has " + dhash);
            modes.push_back(std::move(m));
        }
        return modes;
    }

    void store(const std::string& dhash, BoundaryCondition bc, const json& key, const std::vector<EigenMode>& modes,
               const std::vector<std::string>& warnings = {}) const {
        const auto dir = scan_dir(dhash, bc, key);
        std::filesystem::create_directories(dir);
        json man;
        man["domain_hash"] = dhash;
        man["scan"] = key;
        man["warnings"] = warnings;
        man["modes"] = json::array();
        for (std::size_t i = 0; i < modes.size(); ++i) {
            std::ostringstream name;
            name << "mode_" << std::setw(5) << std::setfill('0') << i << ".json";
            EigenMode m = modes[i];
            if (m.domain_hash.empty()) m.domain_hash = dhash;
            if (m.domain_hash != dhash) fail(ErrorKind::CacheMismatch, "mode domain hash differs from the cache key");
            atomic_write(dir / name.str(), mode_to_json(m).dump());
            man["modes"].push_back(name.str());
        }
        // manifest last: a scan counts as cached only once all modes are on disk
        atomic_write(dir / "manifest.json", man.dump(1));
    }

private:
    std::filesystem::path root_;
};

// ---------------------------------------------------------------------------
// CSV

/// CSV with a timestamp comment, a config-hash/seed comment and a header row.
class CsvWriter {
public:
    CsvWriter(std::vector<std::string> columns, const std::string& config_hash, std::optional<std::uint64_t> seed)
        : columns_(std::move(columns)) {
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&now, &tm);
        os_ << "# generated " << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ") << "\n";
        os_ << "# config_hash=" << config_hash << " seed=" << (seed ? std::to_string(*seed) : std::string("none")) << "\n";
        for (std::size_t i = 0; i < columns_.size(); ++i) os_ << (i ? "," : "") << columns_[i];
        os_ << "\n";
        os_ << std::setprecision(12);
    }

    template <class... T>
    void row(const T&... v) {
        if (sizeof...(v) != columns_.size()) fail(ErrorKind::InvalidArgument, "CSV row width does not match the header");
        bool first = true;
        ((os_ << (first ? "" : ",") << v, first = false), ...);
        os_ << "\n";
    }

    std::string str() const { return os_.str(); }
    void save(const std::filesystem::path& path) const { atomic_write(path, str()); }

private:
    std::vector<std::string> columns_;
    std::ostringstream os_;
};

}  // namespace qerlab
