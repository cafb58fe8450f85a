#pragma once

#include "eotlab/config.hpp"
#include "eotlab/coupling.hpp"
#include "eotlab/run.hpp"

namespace eotlab {

// Signals an unrecoverable numerical condition; maps to exit code 3.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Everything the verification gate needs alongside a history: the rates, the
// growth constants, the symmetric-entropy envelopes and the Hessian prefactor
// sampled on the probe set.
struct CertificateBundle {
    RateCertificate cert;
    ThresholdResult threshold;
    double alpha_mu = 0.0, alpha_nu = 0.0;
    double beta_mu = 0.0, beta_nu = 0.0;  // +inf allowed
    double D_mu = 0.0, D_nu = 0.0;
    double grad_phi0_abs = 0.0, grad_psi0_abs = 0.0;
    std::vector<double> hess_probe_x;
    std::vector<double> hess_probe_C;     // Hessian-rate prefactor per probe point
    std::vector<double> hess_probe_logC;  // log of the same, robust to overflow
    double initial_l1_grad_nu = 0.0;
};

std::string certificate_to_json(const CertificateBundle& b);
CertificateBundle certificate_from_json(const std::string& text);
std::string certificate_table(const CertificateBundle& b);

void write_certificate(const std::string& path, const CertificateBundle& b);
CertificateBundle read_certificate(const std::string& path);

void write_history_csv(const std::string& path, std::span<const ConvergenceRecord> history);
std::vector<ConvergenceRecord> read_history_csv(const std::string& path);

struct ExperimentArtifacts {
    SinkhornProblem problem;
    ReferenceSolution ref;
    CertificateBundle bundle;
    RunResult run;
};

Marginal1D marginal_from_config(const FamilyConfig& f, double profile_R);

// Builds marginals, reference and certificate, then runs the iteration with
// full diagnostics. The Hessian prefactors are evaluated on `hess_probe`
// (default -2..2) with drift constants taken at each probe point.
ExperimentArtifacts run_experiment(const ExperimentConfig& cfg);

struct VerifyReport {
    bool pass = true;
    std::vector<std::string> violations;
    std::vector<std::string> checks;  // names of all assertions evaluated
};

// Re-checks every history-expressible bound against the certificate:
// the integrated-gradient and plan-transport envelopes, the pointwise ratio
// envelope, the symmetric-entropy envelopes, entropy monotonicity along the
// adjusted marginals, the Hessian envelope on the probe maximum, and the
// consistency of the recorded product column. Pure function of its inputs.
VerifyReport verify_history(std::span<const ConvergenceRecord> history,
                            const CertificateBundle& b);

}  // namespace eotlab
