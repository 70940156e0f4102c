// qerlab: spectra, curve restrictions, QER statistics and billiard diagnostics
// from a JSON experiment config. Results go to <out>/<command>.csv; errors go
// to stderr as one line of JSON with a nonzero exit code.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
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

namespace {

using namespace qerlab;
namespace fs = std::filesystem;

struct Overrides {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::vector<double> window;
};

ExperimentConfig load_config(const Overrides& o, bool need_config = true) {
    json j = json::object();
    if (!o.config.empty()) {
        j = read_json(o.config);
    } else if (need_config) {
        fail(ErrorKind::InvalidConfig, "--config is required");
    }
    if (o.seed) j["seed"] = *o.seed;
    if (o.threads) j["threads"] = *o.threads;
    if (!o.window.empty()) j["window"] = o.window;
    if (!o.out.empty()) j["out"] = o.out;
    if (!need_config && !j.contains("domain")) j["domain"] = json{{"shape", "disc"}, {"R", 1.0}};
    return parse_experiment_config(j);
}

fs::path output_path(const ExperimentConfig& c, const std::string& name) {
    fs::create_directories(c.out);
    return fs::path(c.out) / (name + ".csv");
}

std::string csv_safe(std::string s) {
    for (char& ch : s)
        if (ch == ',' || ch == '\n') ch = ';';
    return s;
}

void warn(const std::string& msg) { std::cerr << "warning: " << msg << "\n"; }

SpectrumResult spectrum_for(const ExperimentConfig& c) {
    const SpectrumCache cache = SpectrumCache::from_env(QERLAB_DEFAULT_CACHE);
    SpectrumResult res = obtain_spectrum(spectrum_request(c), &cache);
    for (const auto& w : res.warnings) warn(w);
    return res;
}

int cmd_spectrum(const ExperimentConfig& c) {
    const auto res = spectrum_for(c);
    CsvWriter csv({"j", "lambda_j", "residual"}, c.hash, c.seed);
    for (std::size_t j = 0; j < res.modes.size(); ++j) csv.row(j + 1, res.modes[j].lambda, res.modes[j].residual);
    csv.save(output_path(c, "spectrum"));
    return 0;
}

int cmd_restrict(const ExperimentConfig& c) {
    const Domain domain = domain_from_json(c.domain_spec);
    const InteriorCurve H = require_curve(c);
    const auto res = spectrum_for(c);
    const auto recs = restrict_modes(domain, res.modes, H, c.threads);
    CsvWriter csv({"lambda_j", "norm2_value", "norm2_normal", "norm2_tangential", "n_nodes"}, c.hash, c.seed);
    for (const auto& r : recs) {
        double a = 0.0, b = 0.0, t = 0.0;
        for (int j = 0; j < r.grid.size(); ++j) {
            a += r.grid.w[j] * std::norm(r.r.value[j]);
            b += r.grid.w[j] * std::norm(r.r.normal[j]);
            t += r.grid.w[j] * std::norm(r.r.tangential[j]);
        }
        csv.row(r.lambda, a, b, t, r.grid.size());
    }
    csv.save(output_path(c, "restrict"));
    return 0;
}

double config_prediction(const ExperimentConfig& c, const Domain& domain, const InteriorCurve& H, const Symbol& a, bool cauchy) {
    const std::uint64_t seed = c.convention == LimitConvention::transfer ? require_seed(c) : c.seed.value_or(0);
    const auto est = cauchy ? predicted_cd_limit(domain, H, a, c.bc, c.mc_samples, seed, c.convention, c.threads)
                            : predicted_limit(domain, H, a, c.bc, c.data, c.mc_samples, seed, c.convention, c.threads);
    return est.value;
}

int cmd_qer(const ExperimentConfig& c, bool cauchy) {
    const Domain domain = domain_from_json(c.domain_spec);
    const InteriorCurve H = require_curve(c);
    const Symbol a = config_symbol(c, H);
    const double predicted = config_prediction(c, domain, H, a, cauchy);
    const auto res = spectrum_for(c);
    const auto recs = restrict_modes(domain, res.modes, H, c.threads);
    if (cauchy) {
        CsvWriter csv({"lambda_j", "value_re", "value_im", "predicted", "abs_err"}, c.hash, c.seed);
        for (const auto& r : recs) {
            const cplx v = cauchy_matrix_element(r.r, r.grid, a);
            csv.row(r.lambda, v.real(), v.imag(), predicted, std::abs(v - predicted));
        }
        csv.save(output_path(c, "cauchy"));
    } else {
        CsvWriter csv({"lambda_j", "data_kind", "value_re", "value_im", "predicted", "abs_err"}, c.hash, c.seed);
        for (const auto& r : recs) {
            const cplx v = data_matrix_element(r, a, c.data);
            csv.row(r.lambda, data_name(c.data), v.real(), v.imag(), predicted, std::abs(v - predicted));
        }
        csv.save(output_path(c, "qer"));
    }
    return 0;
}

int cmd_anc(const ExperimentConfig& c) {
    const Domain domain = domain_from_json(c.domain_spec);
    const InteriorCurve H = require_curve(c);
    const std::uint64_t seed = require_seed(c);
    CsvWriter csv({"p", "k", "delta", "fraction", "stderr", "excluded_fraction", "n_samples", "seed"}, c.hash, c.seed);
    for (const auto& [p, k] : c.anc_pairs) {
        for (double d : c.anc_deltas) {
            const auto e = commutation_fraction(domain, H, p, k, d, c.anc_samples, seed);
            csv.row(p, k, d, e.fraction, e.stderr_, e.excluded_fraction, e.n_samples, e.seed);
        }
    }
    csv.save(output_path(c, "anc"));
    return 0;
}

int cmd_weyl(const ExperimentConfig& c) {
    const Domain domain = domain_from_json(c.domain_spec);
    const auto res = spectrum_for(c);
    std::vector<double> lambdas, values;
    double target = 0.0;
    if (c.curve_spec) {
        const InteriorCurve H = require_curve(c);
        const Symbol a = config_symbol(c, H);
        target = config_prediction(c, domain, H, a, false);
        for (const auto& r : restrict_modes(domain, res.modes, H, c.threads)) {
            lambdas.push_back(r.lambda);
            values.push_back(data_matrix_element(r, a, c.data).real());
        }
    } else {
        // boundary traces; a symbol here is read as a function of arc length y
        const Symbol a = symbol_from_json(c.symbol_spec, domain.perimeter());
        if (!a.s_only) fail(ErrorKind::InvalidConfig, "boundary Weyl averages take a symbol of arc length only");
        auto ay = [&](double y) { return a(y, 0.0).real(); };
        target = predicted_boundary_limit(domain, [&](double y, double) { return ay(y); }, c.bc);
        for (const auto& m : res.modes) {
            lambdas.push_back(m.lambda);
            values.push_back(boundary_matrix_element(ModeField(domain, m), ay));
        }
    }
    CsvWriter csv({"lambda", "N_lambda", "running_avg", "target"}, c.hash, c.seed);
    for (const auto& row : weyl_average(lambdas, values, target)) csv.row(row.lambda, row.n, row.running_avg, row.target);
    csv.save(output_path(c, "weyl"));
    return 0;
}

int cmd_nodal(const ExperimentConfig& c) {
    const Domain domain = domain_from_json(c.domain_spec);
    const InteriorCurve H = require_curve(c);
    const auto res = spectrum_for(c);
    CsvWriter csv({"lambda_j", "count", "count_over_lambda"}, c.hash, c.seed);
    for (const auto& m : res.modes) {
        try {
            const auto n = nodal_intersections(ModeField(domain, m), H, c.threads);
            csv.row(m.lambda, n.count, n.count / m.lambda);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::ZeroTrace) throw;
            warn("skipping lambda=" + std::to_string(m.lambda) + ": " + e.what());
        }
    }
    csv.save(output_path(c, "nodal"));
    return 0;
}

int cmd_measure(const ExperimentConfig& c) {
    const Domain domain = domain_from_json(c.domain_spec);
    const InteriorCurve H = require_curve(c);
    const Symbol a = config_symbol(c, H);
    const std::uint64_t seed = require_seed(c);
    CsvWriter csv({"convention", "data_kind", "value", "stderr", "n_samples", "excluded_fraction", "seed"}, c.hash, c.seed);
    for (auto conv : {LimitConvention::transfer, LimitConvention::local_weyl}) {
        const auto e = predicted_limit(domain, H, a, c.bc, c.data, c.mc_samples, seed, conv, c.threads);
        csv.row(convention_name(conv), data_name(c.data), e.value, e.stderr_, e.n_samples, e.excluded_fraction, e.seed);
    }
    double qerr = 0.0;
    const double q = predicted_limit_quadrature(domain, H, a, c.bc, c.data, 256, &qerr, c.threads);
    csv.row("transfer_quadrature", data_name(c.data), q, qerr, 256 * 256, 0.0, seed);
    csv.save(output_path(c, "measure"));
    return 0;
}

int cmd_diag(const ExperimentConfig& c) {
    DiagOptions opt;
    opt.seed = c.seed.value_or(1);
    opt.threads = c.threads;
    const auto checks = run_diagnostics(opt);
    CsvWriter csv({"check", "value", "threshold", "pass", "informational", "seconds", "detail"}, c.hash, opt.seed);
    for (const auto& k : checks) {
        csv.row(k.name, k.value, k.threshold, k.pass ? "true" : "false", k.informational ? "true" : "false", k.seconds,
                csv_safe(k.detail));
        std::fprintf(stdout, "%-44s %-4s %.6g (threshold %.3g)%s\n", k.name.c_str(), k.pass ? "PASS" : "FAIL", k.value, k.threshold,
                     k.informational ? " [informational]" : "");
    }
    csv.save(output_path(c, "diag"));
    return all_pass(checks) ? 0 : 1;
}

void print_error(const std::string& kind, const std::string& message) {
    std::cerr << json{{"error", kind}, {"message", message}}.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qerlab: quantum ergodic restriction experiments on planar billiards"};
    app.require_subcommand(1);
    Overrides o;
    std::string command;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"spectrum", "eigenvalues in the window (cached)"},
        {"restrict", "L2 norms of the Cauchy data on the curve"},
        {"qer", "matrix elements <Op(a) g, g> of Dirichlet or Neumann data"},
        {"cauchy", "Cauchy-data matrix elements"},
        {"anc", "commutation fractions of the transmission and billiard maps"},
        {"weyl", "running averages against the local Weyl limit"},
        {"nodal", "sign changes of the modes along the curve"},
        {"measure", "predicted limits in both conventions"},
        {"diag", "self-checks against closed-form oracles"}};
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", o.config, "experiment config (JSON)");
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--seed", o.seed, "random seed");
        sub->add_option("--threads", o.threads, "worker threads");
        sub->add_option("--window", o.window, "eigenvalue window A B")->expected(2);
        sub->callback([&command, name] { command = name; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("InvalidArgument", e.what());
        return 2;
    }
    try {
        const ExperimentConfig c = load_config(o, command != "diag");
        if (command == "spectrum") return cmd_spectrum(c);
        if (command == "restrict") return cmd_restrict(c);
        if (command == "qer") return cmd_qer(c, false);
        if (command == "cauchy") return cmd_qer(c, true);
        if (command == "anc") return cmd_anc(c);
        if (command == "weyl") return cmd_weyl(c);
        if (command == "nodal") return cmd_nodal(c);
        if (command == "measure") return cmd_measure(c);
        if (command == "diag") return cmd_diag(c);
    } catch (const Error& e) {
        print_error(std::string(kind_name(e.kind())), e.what());
        return 1;
    } catch (const json::exception& e) {
        print_error("InvalidConfig", e.what());
        return 1;
    } catch (const std::exception& e) {
        print_error("Internal", e.what());
        return 1;
    }
    return 1;
}
