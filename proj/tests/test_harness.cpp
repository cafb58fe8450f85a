#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#ifndef _WIN32
#include <sys/wait.h>
#endif

#include "eotlab/harness.hpp"

using namespace eotlab;

namespace {

const char* kMinimalConfig = R"({
  "mu": {"family": "gaussian", "mean": 0, "var": 1},
  "nu": {"family": "gaussian", "mean": 0, "var": 1},
  "T": 2.0
})";

ExperimentConfig small_config() {
    auto cfg = parse_config_text(kMinimalConfig);
    cfg.n_nodes = 256;
    cfg.max_iters = 5;
    cfg.stop_tol = 1e-9;
    return cfg;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config parsing: defaults and validation") {
    const auto cfg = parse_config_text(kMinimalConfig);
    CHECK(cfg.n_nodes == 1024);
    CHECK(cfg.tail_budget == 1e-12);
    CHECK(cfg.stop_tol == 1e-12);
    CHECK(cfg.fp_tol == 1e-10);
    CHECK(cfg.initialization == "phi_zero");
    CHECK(cfg.effective_reference() == "gaussian_oracle");

    CHECK_THROWS_AS(parse_config_text("{\"mu\": {\"family\": \"gaussian\"}, \"T\": 1}"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"mu": {"family": "gaussian"},
        "nu": {"family": "gaussian"}, "T": -1})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"mu": {"family": "student_t"},
        "nu": {"family": "gaussian"}, "T": 1})"),
                    ConfigError);
    // A perturbed family cannot be paired with the closed-form reference.
    CHECK_THROWS_AS(parse_config_text(R"({
        "mu": {"family": "perturbed_gaussian", "amplitude": 0.1, "frequency": 2},
        "nu": {"family": "gaussian"}, "T": 2, "reference": "gaussian_oracle"})"),
                    ConfigError);
    // The same pair defaults to the long-run reference.
    const auto pert = parse_config_text(R"({
        "mu": {"family": "perturbed_gaussian", "amplitude": 0.1, "frequency": 2},
        "nu": {"family": "gaussian"}, "T": 2})");
    CHECK(pert.effective_reference() == "long_run");
}

TEST_CASE("certificate JSON round-trips field for field") {
    const auto art = run_experiment(small_config());
    const std::string a = certificate_to_json(art.bundle);
    const auto parsed = certificate_from_json(a);
    const std::string b = certificate_to_json(parsed);
    CHECK(a == b);
    CHECK(parsed.cert.product_rho == art.bundle.cert.product_rho);
    CHECK(parsed.cert.gamma_mu == art.bundle.cert.gamma_mu);
    CHECK(parsed.beta_mu == art.bundle.beta_mu);
    CHECK(parsed.hess_probe_logC == art.bundle.hess_probe_logC);
}

TEST_CASE("history CSV round-trips and verifies") {
    const auto art = run_experiment(small_config());
    const std::string csv = "/tmp/eotlab_test_history.csv";
    write_history_csv(csv, art.run.history);
    const auto back = read_history_csv(csv);
    REQUIRE(back.size() == art.run.history.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].n == art.run.history[i].n);
        CHECK(back[i].l1_grad_nu == art.run.history[i].l1_grad_nu);
        CHECK(back[i].sym_ent_n1n == art.run.history[i].sym_ent_n1n);
        CHECK(back[i].predicted_product_bound == art.run.history[i].predicted_product_bound);
    }
    const auto report = verify_history(back, art.bundle);
    CHECK(report.pass);
    CHECK(report.violations.empty());
    std::remove(csv.c_str());
}

TEST_CASE("tampered history fails verification naming the broken envelope") {
    const auto art = run_experiment(small_config());
    auto history = art.run.history;
    REQUIRE(history.size() >= 3);
    history[1].l1_grad_mu *= 10.0;
    const auto report = verify_history(history, art.bundle);
    CHECK_FALSE(report.pass);
    bool named = false;
    for (const auto& v : report.violations)
        if (v.find("theorem-l1-mu") != std::string::npos) named = true;
    CHECK(named);
}

TEST_CASE("identical configurations produce byte-identical outputs") {
    const auto cfg = small_config();
    const auto a = run_experiment(cfg);
    const auto b = run_experiment(cfg);
    const std::string pa = "/tmp/eotlab_det_a.csv", pb = "/tmp/eotlab_det_b.csv";
    write_history_csv(pa, a.run.history);
    write_history_csv(pb, b.run.history);
    CHECK(slurp(pa) == slurp(pb));
    CHECK(certificate_to_json(a.bundle) == certificate_to_json(b.bundle));
    std::remove(pa.c_str());
    std::remove(pb.c_str());
}

TEST_CASE("custom start table flows through the driver") {
    auto cfg = small_config();
    cfg.initialization = "custom";
    // A quadratic start steeper than the target potential.
    for (double y = -10.0; y <= 10.0; y += 0.25) {
        cfg.psi0_nodes.push_back(y);
        cfg.psi0_values.push_back(0.7 * y * y);
    }
    const auto art = run_experiment(cfg);
    CHECK(art.run.history[0].pointwise_ratio_max <= 1.0 + 1e-9);
    CHECK(art.run.history.back().l1_grad_nu < art.run.history[0].l1_grad_nu);
    const auto report = verify_history(art.run.history, art.bundle);
    CHECK(report.pass);
}

#ifdef _WIN32
#define EOTLAB_NO_CLI_TESTS 1
#endif

#ifndef EOTLAB_NO_CLI_TESTS
namespace {

int run_cli(const std::string& args) {
    const char* bin = std::getenv("EOTLAB_BIN");
    if (!bin) return -1;
    const std::string cmd = std::string(bin) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("command-line interface: end-to-end exit codes") {
    if (!std::getenv("EOTLAB_BIN")) {
        MESSAGE("EOTLAB_BIN not set; skipping CLI tests");
        return;
    }
    const std::string dir = "/tmp/eotlab_cli_test";
    std::system(("mkdir -p " + dir).c_str());
    {
        std::ofstream cfg(dir + "/cfg.json");
        cfg << R"({"mu": {"family": "gaussian", "mean": 0, "var": 1},
                   "nu": {"family": "gaussian", "mean": 0, "var": 1},
                   "T": 2.0, "n_nodes": 256, "max_iters": 5, "stop_tol": 1e-9,
                   "n_pairs": 10})";
    }
    {
        std::ofstream bad(dir + "/bad.json");
        bad << R"({"mu": {"family": "gaussian"}, "T": 2.0})";
    }

    CHECK(run_cli("oracle --config " + dir + "/cfg.json") == 0);
    CHECK(run_cli("rates --config " + dir + "/cfg.json --out " + dir + "/cert.json") == 0);
    CHECK(run_cli("run --config " + dir + "/cfg.json --out " + dir + "/run") == 0);
    CHECK(run_cli("verify --csv " + dir + "/run.csv --certificate " + dir + "/run.cert.json") ==
          0);
    CHECK(run_cli("coupling-check --config " + dir + "/cfg.json --out " + dir + "/pairs") == 0);
    CHECK(run_cli("run --config " + dir + "/bad.json") == 2);
    CHECK(run_cli("run --config " + dir + "/does_not_exist.json") == 2);

    // Tamper with one recorded value; the gate must reject with exit 1.
    {
        const std::string csv = slurp(dir + "/run.csv");
        std::istringstream in(csv);
        std::ostringstream out;
        std::string line;
        int row = 0;
        while (std::getline(in, line)) {
            if (row == 2) {
                // Inflate the second column of the first data row tenfold.
                const auto c1 = line.find(','), c2 = line.find(',', line.find(',') + 1);
                const std::string head = line.substr(0, c1);
                const double v = std::stod(line.substr(c1 + 1, c2 - c1 - 1)) * 10.0;
                char buf[64];
                std::snprintf(buf, sizeof(buf), "%.17g", v);
                out << head << ',' << buf << line.substr(c2) << "\n";
            } else {
                out << line << "\n";
            }
            ++row;
        }
        std::ofstream tampered(dir + "/tampered.csv");
        tampered << out.str();
    }
    CHECK(run_cli("verify --csv " + dir + "/tampered.csv --certificate " + dir +
                  "/run.cert.json") == 1);
}
#endif
