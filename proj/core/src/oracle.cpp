#include "eotlab/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace eotlab {

namespace {

// Quadratic coefficients of log P_T exp(-h) for h(y) = a y^2/2 + b y + c:
// out.a = -a/(1+Ta), out.b = -b/(1+Ta), out.c = T b^2/(2(1+Ta)) - c - log(1+Ta)/2.
struct Quad {
    double a, b, c;
};

Quad heat_of_quadratic(const Quad& h, double T) {
    const double denom = 1.0 + T * h.a;
    if (!(denom > 0.0)) throw std::runtime_error("heat_of_quadratic: non-integrable quadratic");
    Quad out;
    out.a = -h.a / denom;
    out.b = -h.b / denom;
    out.c = T * h.b * h.b / (2.0 * denom) - h.c - 0.5 * std::log(denom);
    return out;
}

double gaussian_entropy(double var) { return -0.5 * std::log(2.0 * M_PI * M_E * var); }

}  // namespace

double GaussianEOT::plan_var_x() const {
    const double q11 = 1.0 / T + a_phi, q22 = 1.0 / T + a_psi, q12 = -1.0 / T;
    const double det = q11 * q22 - q12 * q12;
    return q22 / det;
}

double GaussianEOT::plan_var_y() const {
    const double q11 = 1.0 / T + a_phi, q22 = 1.0 / T + a_psi, q12 = -1.0 / T;
    const double det = q11 * q22 - q12 * q12;
    return q11 / det;
}

double GaussianEOT::plan_mean_x() const {
    // Mean solves Q m = -(b_phi, b_psi).
    const double q11 = 1.0 / T + a_phi, q22 = 1.0 / T + a_psi, q12 = -1.0 / T;
    const double det = q11 * q22 - q12 * q12;
    return (-b_phi * q22 + b_psi * q12) / det;
}

double GaussianEOT::plan_mean_y() const {
    const double q11 = 1.0 / T + a_phi, q22 = 1.0 / T + a_psi, q12 = -1.0 / T;
    const double det = q11 * q22 - q12 * q12;
    return (-b_psi * q11 + b_phi * q12) / det;
}

GaussianEOT solve_gaussian(double mu_mean, double mu_var, double nu_mean, double nu_var, double T,
                           double tol) {
    if (!(mu_var > 0.0) || !(nu_var > 0.0) || !(T > 0.0))
        throw std::domain_error("solve_gaussian: variances and T must be positive");

    GaussianEOT sol;
    sol.mu_mean = mu_mean;
    sol.mu_var = mu_var;
    sol.nu_mean = nu_mean;
    sol.nu_var = nu_var;
    sol.T = T;

    const double am = 1.0 / mu_var, an = 1.0 / nu_var;
    // Negative log densities as quadratics (constants included).
    const Quad Umu{am, -am * mu_mean, 0.5 * am * mu_mean * mu_mean + 0.5 * std::log(2.0 * M_PI * mu_var)};
    const Quad Unu{an, -an * nu_mean, 0.5 * an * nu_mean * nu_mean + 0.5 * std::log(2.0 * M_PI * nu_var)};

    // The coefficient map contracts once T exceeds the strongly log-concave
    // threshold; below it, relax with factor 1/2 and report the iteration count.
    const double thr = sufficient_T(rate_params_from(make_gaussian(mu_mean, mu_var),
                                                     make_gaussian(nu_mean, nu_var), T))
                           .threshold;
    const double relax = T > thr ? 1.0 : 0.5;

    Quad phi{0.0, 0.0, 0.0};
    Quad psi = Unu;  // null start: the first half-step returns the nu potential
    const int max_iter = 100000;
    int it = 0;
    double delta = 1.0;
    for (; it < max_iter && delta > tol; ++it) {
        const Quad hp = heat_of_quadratic(psi, T);
        Quad phi_new{Umu.a + hp.a, Umu.b + hp.b, Umu.c + hp.c};
        phi_new.a = relax * phi_new.a + (1.0 - relax) * phi.a;
        phi_new.b = relax * phi_new.b + (1.0 - relax) * phi.b;
        phi_new.c = relax * phi_new.c + (1.0 - relax) * phi.c;
        const Quad hq = heat_of_quadratic(phi_new, T);
        Quad psi_new{Unu.a + hq.a, Unu.b + hq.b, Unu.c + hq.c};
        delta = std::max({std::abs(psi_new.a - psi.a), std::abs(psi_new.b - psi.b),
                          std::abs(phi_new.a - phi.a), std::abs(phi_new.b - phi.b)});
        phi = phi_new;
        psi = psi_new;
    }
    sol.iterations = it;

    // Residual of the alternating system in the quadratic/linear coefficients.
    {
        const Quad hp = heat_of_quadratic(psi, T);
        const Quad hq = heat_of_quadratic(phi, T);
        sol.residual = std::max({std::abs(phi.a - (Umu.a + hp.a)), std::abs(phi.b - (Umu.b + hp.b)),
                                 std::abs(psi.a - (Unu.a + hq.a)),
                                 std::abs(psi.b - (Unu.b + hq.b))});
    }

    sol.a_phi = phi.a;
    sol.b_phi = phi.b;
    sol.a_psi = psi.a;
    sol.b_psi = psi.b;

    // Split the pinned constant sum by the symmetric normalization.
    const Quad hq = heat_of_quadratic(phi, T);
    const double c_sum = Unu.c + hq.c + phi.c;  // c_phi + c_psi at the fixed point
    const double Imu0 = 0.5 * sol.a_phi * (mu_mean * mu_mean + mu_var) + sol.b_phi * mu_mean;
    const double Inu0 = 0.5 * sol.a_psi * (nu_mean * nu_mean + nu_var) + sol.b_psi * nu_mean;
    const double ent_mu = gaussian_entropy(mu_var), ent_nu = gaussian_entropy(nu_var);
    sol.c_phi = 0.5 * (c_sum + Inu0 - Imu0 + ent_nu - ent_mu);
    sol.c_psi = c_sum - sol.c_phi;

    const double q11 = 1.0 / T + sol.a_phi, q22 = 1.0 / T + sol.a_psi, q12 = -1.0 / T;
    sol.cross_cov = (1.0 / T) / (q11 * q22 - q12 * q12);
    return sol;
}

bool oracle_profile_check(const GaussianEOT& sol, double tol) {
    const double am = 1.0 / sol.mu_var, an = 1.0 / sol.nu_var;
    const double a_phi_limit = strongly_logconcave_limit(am, an, sol.T);
    const double a_psi_limit = strongly_logconcave_limit(an, am, sol.T);
    return std::abs(sol.a_phi - a_phi_limit) <= tol && std::abs(sol.a_psi - a_psi_limit) <= tol;
}

}  // namespace eotlab
