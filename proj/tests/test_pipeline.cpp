#include <gtest/gtest.h>

#include <filesystem>

#include <unistd.h>

#include "qerlab/io.hpp"
#include "qerlab/pipeline.hpp"

using namespace qerlab;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("qerlab_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorKind::Io;
}

}  // namespace

TEST(Hash, Fnv1aReferenceValues) {
    EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
    EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST(Config, ParsesFullConfig) {
    const json j = json::parse(R"({
        "domain": {"shape": "stadium", "a": 1.0, "r": 1.0},
        "curve": {"shape": "segment", "a": [0, -0.85], "b": [0, 0.85]},
        "bc": "neumann", "window": [20, 25], "points_per_wavelength": 6, "lambda_tol": 1e-8,
        "normalization": "rellich", "symbol": {"kind": "one"}, "data": "neumann",
        "convention": "local_weyl", "mc_samples": 1000, "seed": 3, "out": "x",
        "anc": {"pairs": [[1, 1]], "deltas": [0.1, 0.05], "samples": 500}})");
    const auto c = parse_experiment_config(j);
    EXPECT_EQ(c.bc, BoundaryCondition::neumann);
    EXPECT_DOUBLE_EQ(c.lo, 20.0);
    EXPECT_DOUBLE_EQ(c.hi, 25.0);
    EXPECT_DOUBLE_EQ(c.scan.points_per_wavelength, 6.0);
    EXPECT_TRUE(c.normalize.rellich_only);
    EXPECT_EQ(c.data, DataKind::neumann_data);
    EXPECT_EQ(c.convention, LimitConvention::local_weyl);
    EXPECT_EQ(c.mc_samples, 1000u);
    ASSERT_TRUE(c.seed);
    EXPECT_EQ(*c.seed, 3u);
    EXPECT_EQ(c.anc_pairs.size(), 1u);
    EXPECT_EQ(c.anc_deltas.size(), 2u);
    EXPECT_NEAR(require_curve(c).length(), 1.7, 1e-12);
}

TEST(Config, RejectsBadInput) {
    const auto base = json::parse(R"({"domain": {"shape": "disc", "R": 1.0}})");
    EXPECT_NO_THROW(parse_experiment_config(base));
    auto bad = base;
    bad["colour"] = "red";
    EXPECT_EQ(kind_of([&] { parse_experiment_config(bad); }), ErrorKind::InvalidConfig);
    bad = base;
    bad["bc"] = "robin";
    EXPECT_EQ(kind_of([&] { parse_experiment_config(bad); }), ErrorKind::InvalidConfig);
    bad = base;
    bad["window"] = json::array({5.0, 2.0});
    EXPECT_EQ(kind_of([&] { parse_experiment_config(bad); }), ErrorKind::InvalidConfig);
    EXPECT_EQ(kind_of([&] { parse_experiment_config(json::parse(R"({"bc": "neumann"})")); }), ErrorKind::InvalidConfig);
    const auto c = parse_experiment_config(base);
    EXPECT_EQ(kind_of([&] { require_seed(c); }), ErrorKind::InvalidConfig);
    EXPECT_EQ(kind_of([&] { require_curve(c); }), ErrorKind::InvalidConfig);
}

TEST(Cache, ModesRoundTrip) {
    const fs::path root = temp_dir("cache");
    const SpectrumCache cache(root);
    SpectrumRequest req;
    req.domain_spec = json{{"shape", "disc"}, {"R", 1.0}};
    req.bc = BoundaryCondition::dirichlet;
    req.lo = 2.0;
    req.hi = 4.5;
    req.scan.fixed_nodes = 96;
    req.normalize.rellich_only = true;
    const auto first = obtain_spectrum(req, &cache);
    EXPECT_FALSE(first.from_cache);
    ASSERT_EQ(first.modes.size(), 3u);  // j01, j11 twice
    const auto second = obtain_spectrum(req, &cache);
    EXPECT_TRUE(second.from_cache);
    ASSERT_EQ(second.modes.size(), first.modes.size());
    for (std::size_t i = 0; i < first.modes.size(); ++i) {
        EXPECT_EQ(second.modes[i].lambda, first.modes[i].lambda);
        ASSERT_EQ(second.modes[i].trace.size(), first.modes[i].trace.size());
        for (std::size_t k = 0; k < first.modes[i].trace.size(); ++k) EXPECT_EQ(second.modes[i].trace[k], first.modes[i].trace[k]);
    }
    fs::remove_all(root);
}

TEST(Cache, DomainMismatchIsDetected) {
    const fs::path root = temp_dir("mismatch");
    const SpectrumCache cache(root);
    const json key = SpectrumCache::scan_key(BoundaryCondition::neumann, 1.0, 2.0, ScanOptions{});
    EigenMode m;
    m.lambda = 1.5;
    m.bc = BoundaryCondition::neumann;
    m.domain_hash = "aaaa";
    cache.store("aaaa", BoundaryCondition::neumann, key, {m});
    // copy the scan under another domain hash
    fs::create_directories(cache.scan_dir("bbbb", BoundaryCondition::neumann, key).parent_path());
    fs::copy(cache.scan_dir("aaaa", BoundaryCondition::neumann, key), cache.scan_dir("bbbb", BoundaryCondition::neumann, key),
             fs::copy_options::recursive);
    EXPECT_EQ(kind_of([&] { cache.load("bbbb", BoundaryCondition::neumann, key); }), ErrorKind::CacheMismatch);
    fs::remove_all(root);
}

TEST(Cache, ChunkedWindowMatchesOneShot) {
    // a window that spans several grid chunks is cached chunk by chunk
    const fs::path root = temp_dir("chunks");
    const SpectrumCache cache(root);
    SpectrumRequest req;
    req.domain_spec = json{{"shape", "disc"}, {"R", 1.0}};
    req.bc = BoundaryCondition::neumann;
    req.lo = 4.0;
    req.hi = 9.0;
    req.scan.points_per_wavelength = 12.0;
    req.normalize.rellich_only = true;
    const Domain d = domain_from_json(req.domain_spec);
    ASSERT_GT(plan_chunks(d, req.lo, req.hi, req.scan).size(), 1u);
    const auto chunked = obtain_spectrum(req, &cache);
    const auto direct = obtain_spectrum(req, nullptr);
    ASSERT_EQ(chunked.modes.size(), direct.modes.size());
    for (std::size_t i = 0; i < direct.modes.size(); ++i) EXPECT_NEAR(chunked.modes[i].lambda, direct.modes[i].lambda, 1e-7);
    fs::remove_all(root);
}

TEST(Restrict, DataMatrixElementOfOneIsL2Norm) {
    SpectrumRequest req;
    req.domain_spec = json{{"shape", "disc"}, {"R", 1.0}};
    req.bc = BoundaryCondition::dirichlet;
    req.lo = 2.0;
    req.hi = 2.6;
    req.scan.fixed_nodes = 96;
    const auto res = obtain_spectrum(req, nullptr);
    ASSERT_EQ(res.modes.size(), 1u);
    const Domain d = domain_from_json(req.domain_spec);
    const auto C = InteriorCurve::circle({0.0, 0.0}, 0.5);
    const auto recs = restrict_modes(d, res.modes, C);
    ASSERT_EQ(recs.size(), 1u);
    double l2 = 0.0;
    for (int j = 0; j < recs[0].grid.size(); ++j) l2 += recs[0].grid.w[j] * std::norm(recs[0].r.value[j]);
    EXPECT_NEAR(data_matrix_element(recs[0], Symbol::one(), DataKind::dirichlet_data).real(), l2, 1e-10 * l2);
    // radial mode: u^H is constant on the circle, proportional to J_0(lambda / 2)
    for (const auto& v : recs[0].r.value) EXPECT_NEAR(std::abs(v) / std::abs(recs[0].r.value[0]), 1.0, 1e-6);
}
