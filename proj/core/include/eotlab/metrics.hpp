#pragma once

#include "eotlab/sinkhorn.hpp"

namespace eotlab {

// One row of a convergence history.
struct ConvergenceRecord {
    int n = 0;
    double l1_grad_mu = 0.0;
    double l1_grad_nu = 0.0;
    double w1_plan_nn = 0.0;
    double w1_plan_n1n = 0.0;
    double sym_ent_nn = 0.0;
    double sym_ent_n1n = 0.0;
    double hess_err_max = 0.0;
    double pointwise_ratio_max = 0.0;
    double h_mu_n = 0.0;
    double h_nu_n = 0.0;
    double predicted_product_bound = 0.0;  // running product of gamma_k^mu gamma_k^nu / T^2
};

// Order-one transport distance between two discrete measures on the line,
// via the integral of the absolute difference of their distribution functions
// over the merged node set. Inputs must each sum to one.
double w1_1d(std::span<const double> p_weights, std::span<const double> p_nodes,
             std::span<const double> q_weights, std::span<const double> q_nodes);

// Fast path for two weight vectors on a shared sorted node set.
double w1_1d_shared(std::span<const double> p_weights, std::span<const double> q_weights,
                    std::span<const double> nodes);

struct KlResult {
    double value = 0.0;
    bool support_violation = false;  // p puts mass where q has none
};

// Relative entropy of p with respect to q (same node set), log-domain.
KlResult kl(std::span<const double> p, std::span<const double> q);
double sym_kl(std::span<const double> p, std::span<const double> q);
double sym_kl_plans(const Plan2D& a, const Plan2D& b);

// Difference-of-averages identity for the symmetric plan entropy: with
// diff = (normalized iterate - reference) on one axis, returns
// sum diff * (base_weights - adjusted_weights).
double sym_entropy_from_potentials(std::span<const double> diff,
                                   std::span<const double> base_weights,
                                   std::span<const double> adjusted_weights);

// Integrated gradient gaps against the marginals, through the conditional-mean
// representation of the transform derivative. The phi gradient is driven by
// the psi-side potential and vice versa.
double l1_phi_grad_error(const SinkhornProblem& p, std::span<const double> psi_iter,
                         const ReferenceSolution& ref);
double l1_psi_grad_error(const SinkhornProblem& p, std::span<const double> phi_iter,
                         const ReferenceSolution& ref);
// Same psi-side gap integrated against an arbitrary weight vector on the nu grid.
double l1_psi_grad_error_weighted(const SinkhornProblem& p, std::span<const double> phi_iter,
                                  const ReferenceSolution& ref, std::span<const double> weights);

// max over the nu grid of |psi-gradient gap|(x) / (A|x| + B).
double pointwise_ratio_max(const SinkhornProblem& p, std::span<const double> phi_iter,
                           const ReferenceSolution& ref, double A, double B);

// Conditional-decomposition transport bounds for the two plan families:
// integral over one marginal of the distance between iterate and reference
// conditionals at each base point.
double w1_plan_bound_nn(const SinkhornProblem& p, std::span<const double> phi_iter,
                        const ReferenceSolution& ref);
double w1_plan_bound_n1n(const SinkhornProblem& p, std::span<const double> psi_iter,
                         const ReferenceSolution& ref);

struct RateFit {
    double ratio = 1.0;
    double log_slope = 0.0;
};

// Least-squares slope of log(errors) against the index over the final half of
// the sequence; nonpositive entries are trimmed first, >= 3 must remain.
RateFit fit_rate(std::span<const double> errors);

}  // namespace eotlab
