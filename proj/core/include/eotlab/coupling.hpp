#pragma once

#include "eotlab/metrics.hpp"

namespace eotlab {

struct CouplingCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
    double slack() const { return rhs > 0.0 ? rhs / lhs : (lhs == 0.0 ? 1.0 : 0.0); }
};

// Transport-versus-score inequality between two normalized marginals:
//   W1(p, q) <= prefactor(p) * integral of |U_p' - U_q'| against q,
// with prefactor (g'(0)/g'(R))^2 / (alpha + g'(0)) for a non-vanishing profile
// (R the cutoff radius sup_norm*(1/g'(0) + 2/alpha)) and 1/alpha otherwise.
CouplingCheck theorem_w1_score_check(const Marginal1D& p, const Marginal1D& q,
                                     double rel_tol = 1e-6);

// Per-point conditional contraction: at base point x,
//   W1(cond(x, psi_n), cond(x, psi_star)) <= gamma_n * integral of the
//   psi-gradient gap against the reference conditional at x.
CouplingCheck conditional_contraction_check(const SinkhornProblem& prob,
                                            std::span<const double> psi_n,
                                            std::span<const double> phi_n,
                                            const ReferenceSolution& ref, double x,
                                            double gamma_n, double rel_tol = 1e-6);

struct RandomPairConfig {
    int n_pairs = 100;
    unsigned long long seed = 42;
    double mean_lo = -1.0, mean_hi = 1.0;
    double var_lo = 0.5, var_hi = 2.0;
    double amp_hi = 0.1;   // perturbation amplitude upper bound
    double freq_hi = 2.0;  // perturbation frequency upper bound
    int n_nodes = 512;
};

struct CouplingSuiteResult {
    std::vector<CouplingCheck> cases;
    int failures = 0;
};

// Randomized suite over Gaussian / perturbed-Gaussian pairs with verified
// profile data; each case evaluates the transport-versus-score inequality.
CouplingSuiteResult coupling_suite(const RandomPairConfig& cfg);

}  // namespace eotlab
