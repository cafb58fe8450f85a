#pragma once

#include "eotlab/metrics.hpp"
#include "eotlab/oracle.hpp"

namespace eotlab {

struct RunOptions {
    int max_iters = 30;
    double stop_tol = 1e-12;          // on the nu-side integrated gradient gap
    std::vector<double> psi0;         // custom start on the nu grid; empty = nu potential
    std::vector<double> hess_probe;   // points for the Hessian gap; default {-2,-1,0,1,2}
    bool keep_snapshots = true;
};

struct IterateSnapshot {
    std::vector<double> phi, psi;
};

struct RunResult {
    std::vector<ConvergenceRecord> history;
    std::vector<IterateSnapshot> snapshots;  // index n holds the iterate pair at step n
    int iterations = 0;
    bool diverged = false;
    double h_mu_first = 0.0;  // relative entropy of the first adjusted mu marginal
    double h_nu_first = 0.0;  // relative entropy of the zeroth adjusted nu marginal
};

// Pointwise nu-side gradient gap of a start psi0 against the reference; an
// empty psi0 denotes the null start (psi0 equal to the nu potential).
std::vector<double> initial_psi_gradient_gap(const SinkhornProblem& p,
                                             const ReferenceSolution& ref,
                                             std::span<const double> psi0 = {});

// Reference potentials from the Gaussian closed form, evaluated on the grids.
ReferenceSolution reference_from_oracle(const SinkhornProblem& p, const GaussianEOT& sol);

// Reference from a long run (null start), mean-matched by the symmetric
// normalization so both potential averages line up with the entropies.
ReferenceSolution reference_long_run(const SinkhornProblem& p, int max_iters, double stop_tol);

// Full iteration with per-step diagnostics. gamma sequences feed the running
// certified product; A and B scale the pointwise ratio. Divergence = the
// nu-side gap growing over five consecutive steps.
RunResult run_sinkhorn(const SinkhornProblem& p, const ReferenceSolution& ref, double A, double B,
                       std::span<const double> gamma_mu, std::span<const double> gamma_nu,
                       const RunOptions& opt);

}  // namespace eotlab
