#pragma once

#include "eotlab/rates.hpp"

namespace eotlab {

// Closed-form solution of the quadratic-cost entropic transport problem for a
// pair of one-dimensional Gaussians, obtained by running the alternating
// fixed-point map on quadratic coefficients. Potentials are
// phi(x) = a_phi x^2/2 + b_phi x + c_phi and likewise for psi, with the
// constants split by the symmetric normalization (equal potential averages
// after adding the differential entropies).
struct GaussianEOT {
    double mu_mean = 0.0, mu_var = 1.0;
    double nu_mean = 0.0, nu_var = 1.0;
    double T = 1.0;
    double a_phi = 0.0, b_phi = 0.0, c_phi = 0.0;
    double a_psi = 0.0, b_psi = 0.0, c_psi = 0.0;
    double cross_cov = 0.0;
    int iterations = 0;
    double residual = 0.0;  // fixed-point defect after convergence

    double phi(double x) const { return 0.5 * a_phi * x * x + b_phi * x + c_phi; }
    double psi(double y) const { return 0.5 * a_psi * y * y + b_psi * y + c_psi; }
    double phi_grad(double x) const { return a_phi * x + b_phi; }
    double psi_grad(double y) const { return a_psi * y + b_psi; }
    // Plan second moments from the precision matrix of the quadratic density.
    double plan_var_x() const;
    double plan_var_y() const;
    double plan_mean_x() const;
    double plan_mean_y() const;
};

GaussianEOT solve_gaussian(double mu_mean, double mu_var, double nu_mean, double nu_var, double T,
                           double tol = 1e-14);

// Tightness check: the quadratic coefficients coincide with the closed-form
// limits of the convexity-floor recursion when alpha and beta are read off the
// Gaussian variances.
bool oracle_profile_check(const GaussianEOT& sol, double tol = 1e-10);

}  // namespace eotlab
