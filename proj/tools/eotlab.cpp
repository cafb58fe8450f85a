// eotlab: log-domain Sinkhorn runs on 1D marginals with certified contraction
// rates and a verification gate over the recorded histories.
//
// Exit codes: 0 success, 1 assertion failure, 2 configuration error,
// 3 numerical failure.

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "eotlab/harness.hpp"

namespace {

using namespace eotlab;

int cmd_rates(const ExperimentConfig& cfg_in, const std::string& out_path) {
    // The symmetric-entropy envelopes need the first adjusted marginals, so a
    // two-step diagnostic run backs the certificate.
    ExperimentConfig cfg = cfg_in;
    cfg.max_iters = std::max(2, std::min(cfg.max_iters, 4));
    cfg.stop_tol = 0.0;
    const ExperimentArtifacts art = run_experiment(cfg);
    const std::string json = certificate_to_json(art.bundle);
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) {
            std::cerr << "eotlab: cannot open " << out_path << "\n";
            return 3;
        }
        out << json;
    } else {
        std::cout << json;
    }
    std::cout << certificate_table(art.bundle);
    return 0;
}

int cmd_run(const ExperimentConfig& cfg, const std::string& out_path) {
    const ExperimentArtifacts art = run_experiment(cfg);
    const std::string base = out_path.empty() ? cfg.output_path : out_path;
    write_history_csv(base + ".csv", art.run.history);
    write_certificate(base + ".cert.json", art.bundle);
    std::cout << "wrote " << base << ".csv (" << art.run.history.size() << " rows) and " << base
              << ".cert.json\n";
    std::cout << "iterations: " << art.run.iterations
              << ", terminal nu-side gradient gap: " << art.run.history.back().l1_grad_nu << "\n";
    return 0;
}

int cmd_oracle(const ExperimentConfig& cfg, const std::string& out_path) {
    if (!cfg.gaussian_pair()) {
        std::cerr << "eotlab oracle: both marginals must be gaussian\n";
        return 2;
    }
    const GaussianEOT sol = solve_gaussian(cfg.mu.mean, cfg.mu.var, cfg.nu.mean, cfg.nu.var, cfg.T);
    char buf[2048];
    std::snprintf(buf, sizeof(buf),
                  "{\n"
                  "  \"mu_mean\": %.17g,\n  \"mu_var\": %.17g,\n"
                  "  \"nu_mean\": %.17g,\n  \"nu_var\": %.17g,\n  \"T\": %.17g,\n"
                  "  \"a_phi\": %.17g,\n  \"b_phi\": %.17g,\n  \"c_phi\": %.17g,\n"
                  "  \"a_psi\": %.17g,\n  \"b_psi\": %.17g,\n  \"c_psi\": %.17g,\n"
                  "  \"cross_cov\": %.17g,\n  \"iterations\": %d,\n  \"residual\": %.17g\n}\n",
                  sol.mu_mean, sol.mu_var, sol.nu_mean, sol.nu_var, sol.T, sol.a_phi, sol.b_phi,
                  sol.c_phi, sol.a_psi, sol.b_psi, sol.c_psi, sol.cross_cov, sol.iterations,
                  sol.residual);
    if (!out_path.empty()) {
        std::ofstream out(out_path);
        if (!out) {
            std::cerr << "eotlab: cannot open " << out_path << "\n";
            return 3;
        }
        out << buf;
    }
    std::cout << buf;
    return 0;
}

int cmd_verify(const std::string& csv_path, const std::string& cert_path) {
    const auto history = read_history_csv(csv_path);
    const auto bundle = read_certificate(cert_path);
    const VerifyReport report = verify_history(history, bundle);
    if (report.pass) {
        std::cout << "verify: all " << report.checks.size() << " assertions hold\n";
        return 0;
    }
    std::cout << "verify: " << report.violations.size() << " violated assertion(s)\n";
    for (const auto& v : report.violations) std::cout << "  " << v << "\n";
    return 1;
}

int cmd_coupling_check(const ExperimentConfig& cfg, const std::string& out_path) {
    RandomPairConfig rc;
    rc.n_pairs = cfg.n_pairs;
    rc.seed = cfg.seed;
    rc.n_nodes = std::min(cfg.n_nodes, 512);
    const CouplingSuiteResult suite = coupling_suite(rc);

    const std::string path = (out_path.empty() ? cfg.output_path : out_path) + ".coupling.csv";
    std::ofstream out(path);
    if (!out) {
        std::cerr << "eotlab: cannot open " << path << "\n";
        return 3;
    }
    out << "case,kind,lhs,rhs,slack,pass\n";
    char buf[256];
    for (std::size_t c = 0; c < suite.cases.size(); ++c) {
        const auto& k = suite.cases[c];
        std::snprintf(buf, sizeof(buf), "%zu,w1-score,%.17g,%.17g,%.17g,%d\n", c, k.lhs, k.rhs,
                      k.slack(), k.pass ? 1 : 0);
        out << buf;
    }
    std::cout << "coupling suite: " << suite.cases.size() - suite.failures << "/"
              << suite.cases.size() << " cases pass; wrote " << path << "\n";
    return suite.failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"1D entropic optimal transport lab: stabilized Sinkhorn runs, "
                 "certified contraction rates, bound verification"};
    app.require_subcommand(1);

    std::string config_path, out_path, csv_path, cert_path;

    auto add_config_opts = [&](CLI::App* sub, bool need_config = true) {
        auto* opt = sub->add_option("--config", config_path, "experiment config (JSON)");
        if (need_config) opt->required();
        sub->add_option("--out", out_path, "output path (prefix or file)");
    };
    auto* rates = app.add_subcommand("rates", "emit a rate certificate (JSON + table)");
    add_config_opts(rates);
    auto* run = app.add_subcommand("run", "run Sinkhorn, emit history CSV + certificate");
    add_config_opts(run);
    auto* oracle = app.add_subcommand("oracle", "closed-form Gaussian solution (JSON)");
    add_config_opts(oracle);
    auto* coupling = app.add_subcommand("coupling-check", "randomized transport-bound suite");
    add_config_opts(coupling);
    auto* verify = app.add_subcommand("verify", "re-check all recorded bounds");
    verify->add_option("--csv", csv_path, "history CSV from a run")->required();
    verify->add_option("--certificate", cert_path, "certificate JSON from the same run")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (verify->parsed()) return cmd_verify(csv_path, cert_path);
        const eotlab::ExperimentConfig cfg = eotlab::parse_config_file(config_path);
        if (rates->parsed()) return cmd_rates(cfg, out_path);
        if (run->parsed()) return cmd_run(cfg, out_path);
        if (oracle->parsed()) return cmd_oracle(cfg, out_path);
        if (coupling->parsed()) return cmd_coupling_check(cfg, out_path);
    } catch (const eotlab::ConfigError& e) {
        std::cerr << "eotlab: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "eotlab: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
