#pragma once

#include <string>
#include <vector>

#include "eotlab/measures.hpp"

namespace eotlab {

// Profile data for a marginal pair plus the regularization parameter.
struct RateParams {
    double alpha_mu = 1.0;
    double alpha_nu = 1.0;
    double beta_mu = std::numeric_limits<double>::infinity();
    double beta_nu = std::numeric_limits<double>::infinity();
    ProfileFunction gt_mu, gt_nu;  // bounded vanishing-origin profiles
    ProfileFunction g_mu, g_nu;    // concavity-side profiles
    double T = 1.0;
};

RateParams rate_params_from(const Marginal1D& mu, const Marginal1D& nu, double T);

enum class Side { Mu, Nu };

// Concavity transfer envelope in the squared separation s:
//   beta*s + s/(T(1+T*alpha)) + sqrt(s) g(sqrt(s)) + sqrt(s) ghat(sqrt(s)) / (1+T*alpha)^2.
// Increasing and concave in s for alpha > -1/T; +inf when beta = +inf and s > 0.
double concavity_envelope(double beta, const ProfileFunction& g, const ProfileFunction& ghat,
                          double alpha, double T, double s);

// Generalized inverse of the envelope at level u: the smallest s with
// envelope >= u. Doubles as a conditional-variance floor (value/2 at u = 2).
// Identically zero when beta = +inf.
double envelope_inverse(double beta, const ProfileFunction& g, const ProfileFunction& ghat,
                        double alpha, double T, double u, double rel_tol = 1e-12);

struct AlphaSchedule {
    Side side = Side::Nu;
    std::vector<double> values;  // convexity floors per iteration, starting at alpha - 1/T
    double limit = 0.0;
    double fixed_point_residual = 0.0;
};

// Iterates the convexity-floor recursion
//   a_{n+1} = alpha - 1/T + envelope_inverse(a_n, 2) / (2 T^2)
// and extends it to the fixed point.
AlphaSchedule alpha_sequence(const RateParams& p, Side side, int n_terms, double fp_tol = 1e-10);

// Closed-form fixed point of the recursion when all profiles vanish:
//   (alpha + sqrt(alpha^2 + 4 alpha/(T^2 beta)))/2 - 1/T  (beta = +inf gives alpha - 1/T).
double strongly_logconcave_limit(double alpha, double beta, double T);

struct RateCertificate {
    std::vector<double> gamma_mu, gamma_nu;
    double gamma_inf_mu = 0.0, gamma_inf_nu = 0.0;
    std::vector<double> hat_gamma_mu, hat_gamma_nu;
    double hat_gamma_inf_mu = 0.0, hat_gamma_inf_nu = 0.0;
    double product_rho = 0.0;    // gamma_inf_mu * gamma_inf_nu / T^2
    double pointwise_rho = 0.0;  // hat_gamma_inf_mu * hat_gamma_inf_nu / T^2
    bool contraction_certified = false;
    bool pointwise_certified = false;
    double A = 0.0, B = 0.0;  // linear-growth constants of the initial gradient gap
    double alpha_phi_star = 0.0, alpha_psi_star = 0.0;
    double T = 0.0;
    // Alternate value of gamma_inf from the simplified tanh-family display,
    // which evaluates cosh^4 at the cutoff radius itself rather than at the
    // tanh argument; reported alongside, never used in bounds.
    double tanh_display_gamma_inf_mu = 0.0, tanh_display_gamma_inf_nu = 0.0;
    bool tanh_display_discrepant = false;
    bool pointwise_sufficient_T = false;  // large-T sufficient condition for the hat rates
};

// Per-iteration contraction factors from the convexity floors. With a
// non-vanishing profile g:
//   gamma_k = g'(0)^2 / ( g'(R_k)^2 * (a_k + 1/T + g'(0)) ),
//   R_k = sup_norm(g) * (1/g'(0) + 2/(a_k + 1/T)),
// and with g = 0 the strongly log-concave value 1/(a_k + 1/T).
RateCertificate gamma_sequence(const RateParams& p, const AlphaSchedule& mu_sched,
                               const AlphaSchedule& nu_sched);

struct ThresholdResult {
    bool certified = false;
    double threshold = 0.0;
    std::string branch;
};

// Sufficient regularization level for a certified contraction. Branches:
// both profiles zero and both beta infinite -> 1/sqrt(alpha_mu*alpha_nu);
// both profiles zero -> the closed strongly log-concave expression;
// otherwise sqrt of the product of profile-rate bounds evaluated at alpha.
ThresholdResult sufficient_T(const RateParams& p);

struct LinearGrowth {
    double A = 0.0, B = 0.0;
};

// Linear-growth constants of the initial gradient gap under the null start:
// A = (T*a+2) / (T*(T*a+1)), B = (1 + sup_norm + |grad at 0|) / (T*a+1).
LinearGrowth init_linear_growth(double alpha_phi_star, double T, double gt_mu_sup,
                                double grad_phi_star_at_0);

// Fills the hat-rate part of a certificate:
//   hat_gamma_k = gamma_k * max{ 1/(T*a+1), 1 + (A/B)(1 + sup + |grad0|)/(a + 1/T) }.
void hat_gamma(RateCertificate& cert, const RateParams& p, double grad_phi_star_at_0,
               double grad_psi_star_at_0);

struct CkpConstants {
    double C1 = 0.0, C2 = 0.0;
    double sigma1 = 0.0, sigma2 = 0.0;  // minimizers
};

// Weighted moment-control constants:
//   C1 = inf_sigma sqrt( 2/sigma + (2/sigma) log E[exp(sigma x^2)] ),
//   C2 = inf_sigma ( 3/sigma + (2/sigma) E[exp(sigma x^2)] ),
// minimized over sigma in (0, alpha/2) by golden section.
CkpConstants ckp_constants(const Marginal1D& m);

// Symmetric-entropy envelope constant
//   D = 2[3A M2 + (A M1 + B) M1 + B M1] + A C2 (sqrt(H) + H/2) + (A M1 + B) C1 sqrt(H),
// where H is the relative entropy of the relevant first adjusted marginal (or
// of the step-n one for the sharpened variant).
double entropy_bound_constant(double A, double B, const Marginal1D& m, const CkpConstants& ckp,
                              double H);

struct DriftPair {
    double A = 0.0, B = 0.0;
};

// Geometric drift constants for V_p(y) = 1 + |y|^p under the conditional
// generator, from the one-sided bound <drift(y), y> >= alpha_eff*y^2 - c_lin*|y|.
// p = 2: A = alpha_eff/2, B = 1 + A + c_lin^2/(2 alpha_eff).
// p = 4: A = alpha_eff,   B = A + max_t (6 t^2 + 2 c_lin t^3 - alpha_eff t^4).
DriftPair drift_constants(double alpha_eff, double c_lin, int p);

// Constants of the Lyapunov-weighted concave transport distance used for the
// Hessian rate: cutoff radii, feasible epsilon, modulated concave cap f and
// its side quantities.
struct DistortedMetricConstants {
    DriftPair drift2, drift4;
    double hinge = 0.0;  // positive part of (profile slope at 0 minus alpha)
    double R1 = 0.0, R2 = 0.0;
    double epsilon = 0.0;
    double epsilon_slack = 0.0;  // feasibility ratio at the chosen epsilon
    double xi = 0.0, beta_const = 0.0;
    double lambda = 0.0;
    double C_I = 0.0;
    double C_Delta = 0.0;
    double f_at_R2 = 0.0;

    double phi(double r) const;
    double f(double r) const;        // non-decreasing, concave, constant past R2
    double f_over_phi(double r) const;  // the modulation factor, in [1/2, 1] below R2

    std::vector<double> f_grid_r, f_grid_v, g_grid_v;  // dense tabulation of f and its modulation
};

DistortedMetricConstants distorted_metric_constants(double alpha_nu, double G_tilde_nu,
                                                    DriftPair d2, DriftPair d4);

struct HessianRateInputs {
    double A = 0.0, B = 0.0;
    double alpha_psi_star = 0.0;
    double gt_nu_sup = 0.0;
    double grad_psi_star_at_0 = 0.0;
    double alpha_nu = 0.0;  // uniform convexity floor used for the moment constants
};

struct HessianRate {
    double value = 0.0;
    double log_value = 0.0;
    double t_star = 0.0;
};

// Prefactor of the Hessian convergence bound at a point x: minimizes over
// waiting times t past the coupling horizon the product of the pole factor,
// the exponential modulation and the moment envelope. Evaluated in the log
// domain; the value may overflow to +inf while log_value stays finite.
HessianRate hessian_rate_constant(double x, double T, const DistortedMetricConstants& dmc,
                                  const HessianRateInputs& in);

}  // namespace eotlab
