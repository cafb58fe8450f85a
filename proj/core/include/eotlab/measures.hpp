#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "eotlab/profiles.hpp"

namespace eotlab {

// Quadrature grid: strictly increasing nodes with composite-trapezoid weights.
struct Grid {
    std::vector<double> nodes;
    std::vector<double> weights;
    double lo = 0.0;
    double hi = 0.0;

    std::size_t size() const { return nodes.size(); }
};

Grid uniform_grid(double lo, double hi, int n_nodes);

enum class MarginalFamily { Gaussian, PerturbedGaussian, Custom };

// A one-dimensional marginal exp(-U(x)) dx with its log-concavity profile data
// and a quadrature representation. Immutable once normalized.
struct Marginal1D {
    MarginalFamily family = MarginalFamily::Gaussian;
    double mean = 0.0;
    double var = 1.0;
    double amplitude = 0.0;  // perturbation a in a*cos(omega*x)
    double frequency = 0.0;  // perturbation omega

    std::function<double(double)> U;   // potential, possibly unnormalized
    std::function<double(double)> U1;  // U'
    std::function<double(double)> U2;  // U''

    // Profile parameters: kappa_U(r) >= alpha - g_tilde(r)/r and
    // ell_U(r) <= beta + g_small(r)/r. beta may be +infinity.
    double alpha = 1.0;
    double beta = std::numeric_limits<double>::infinity();
    ProfileFunction g_tilde;
    ProfileFunction g_small;

    Grid grid;
    double log_normalizer = 0.0;
    std::vector<double> density_weights;
    bool normalized = false;

    // Negative log-density including the normalizing constant.
    double potential_true(double x) const { return U(x) + log_normalizer; }
};

Marginal1D make_gaussian(double mean, double var);
// alpha = 1/var with the dip covered by a tanh profile solved at radius
// profile_R; beta = 1/var + a*omega^2.
Marginal1D make_perturbed_gaussian(double mean, double var, double amplitude, double frequency,
                                   double profile_R = 1.0);
Marginal1D make_custom(std::function<double(double)> U, std::function<double(double)> U1,
                       std::function<double(double)> U2, double alpha, double beta,
                       ProfileFunction g_tilde, ProfileFunction g_small);

// Truncation bounds with sub-Gaussian-dominated tail mass below `tail_budget`,
// uniform nodes. n_nodes >= 16, tail_budget in (0, 1e-3].
Grid build_grid(const Marginal1D& m, int n_nodes, double tail_budget);

// Fills grid (if absent), log_normalizer and density_weights. Log-domain
// throughout; the weights sum to one.
Marginal1D normalize(Marginal1D m, int n_nodes = 1024, double tail_budget = 1e-12);

// k-th absolute moment of a normalized marginal.
double moment(const Marginal1D& m, int k);

// Integral of log(density) against the marginal (negative differential entropy).
double entropy(const Marginal1D& m);

struct ExpMoment {
    double value = 0.0;
    bool divergence_risk = false;  // sigma at or beyond alpha/2
};

// Quadrature value of the exponential square moment E[exp(sigma x^2)].
ExpMoment exp_moment(const Marginal1D& m, double sigma);

}  // namespace eotlab
