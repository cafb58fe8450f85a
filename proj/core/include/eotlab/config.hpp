#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace eotlab {

// Invalid or inconsistent experiment description; maps to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FamilyConfig {
    std::string family;  // "gaussian" | "perturbed_gaussian"
    double mean = 0.0;
    double var = 1.0;
    double amplitude = 0.0;
    double frequency = 0.0;
};

struct ExperimentConfig {
    FamilyConfig mu, nu;
    double T = 0.0;
    int n_nodes = 1024;
    double tail_budget = 1e-12;
    int max_iters = 30;
    double stop_tol = 1e-12;
    double fp_tol = 1e-10;
    int n_terms = 0;          // 0 means max_iters + 2
    double profile_R = 1.0;   // radius at which the tanh profile level is solved
    std::string initialization = "phi_zero";
    std::vector<double> psi0_nodes, psi0_values;  // custom start table
    std::string reference;  // "gaussian_oracle" | "long_run"; empty = family default
    std::string output_path = "eotlab_out";
    unsigned long long seed = 42;
    int n_pairs = 100;
    int probe_points = 33;

    bool gaussian_pair() const {
        return mu.family == "gaussian" && nu.family == "gaussian";
    }
    std::string effective_reference() const {
        return reference.empty() ? (gaussian_pair() ? "gaussian_oracle" : "long_run") : reference;
    }
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

}  // namespace eotlab
