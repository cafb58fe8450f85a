#pragma once

#include <span>
#include <vector>

#include "eotlab/measures.hpp"

namespace eotlab {

struct SinkhornProblem {
    Marginal1D mu, nu;  // normalized marginals
    double T = 1.0;
};

SinkhornProblem make_problem(Marginal1D mu, Marginal1D nu, double T);

// Log-domain heat semigroup transform: log P_T exp(-h)(x) by quadrature over
// the grid carrying h, with the Gaussian kernel constant included so that the
// transform of h = 0 is zero.
double heat_log_transform(std::span<const double> h_values, const Grid& g, double T, double x);

// Mean, variance and log mass of the Gibbs conditional with density
// proportional to exp(-(y-x)^2/(2T) - h(y)) on the grid.
MeanVar conditional_stats(double x, std::span<const double> h_values, const Grid& g, double T);

// Normalized conditional weights on the grid nodes.
std::vector<double> conditional_measure(double x, std::span<const double> h_values, const Grid& g,
                                        double T);

// First and second derivatives of the log-transform via conditional moments:
// grad = (conditional mean - x)/T, hess = -1/T + conditional variance / T^2.
double grad_potential(double x, std::span<const double> h_values, const Grid& g, double T);
double hess_potential(double x, std::span<const double> h_values, const Grid& g, double T);

// Cached log-kernel -(x_i - y_j)^2 / (2T) over the product grid.
struct HeatKernel {
    std::size_t nx = 0, ny = 0;
    std::vector<double> log_k;  // row-major, rows over the mu grid
    double log_gauss_norm = 0.0;

    static HeatKernel build(const SinkhornProblem& p);
    double at(std::size_t i, std::size_t j) const { return log_k[i * ny + j]; }
};

struct SinkhornState {
    int n = 0;
    std::vector<double> phi;       // on the mu grid
    std::vector<double> psi;       // on the nu grid
    std::vector<double> psi_prev;  // psi of the previous iteration
};

// Null start: phi identically zero, psi equal to the nu potential (with its
// normalizing constant), which is what one alternating half-step produces.
SinkhornState make_initial_state(const SinkhornProblem& p, std::span<const double> psi0 = {});

// One full alternating update (phi half-step, then psi half-step).
// Throws on non-finite values despite the log-domain evaluation.
void sinkhorn_step(const SinkhornProblem& p, const HeatKernel& k, SinkhornState& s);

struct Plan2D {
    std::size_t nx = 0, ny = 0;
    std::vector<double> w;     // normalized cell masses, row-major over the mu grid
    std::vector<double> logw;  // logs of the normalized masses

    double at(std::size_t i, std::size_t j) const { return w[i * ny + j]; }
    std::vector<double> row_sums() const;  // marginal on the mu grid
    std::vector<double> col_sums() const;  // marginal on the nu grid
};

Plan2D build_plan(const SinkhornProblem& p, const HeatKernel& k, std::span<const double> phi,
                  std::span<const double> psi);

// Fixed potentials to compare a run against, with conditional statistics and
// conditional weight rows cached for the metric sweeps.
struct ReferenceSolution {
    std::vector<double> phi_star, psi_star;
    std::vector<double> cond_mean_psi, cond_var_psi;  // per mu-node x, conditional under psi_star
    std::vector<double> cond_mean_phi, cond_var_phi;  // per nu-node y, conditional under phi_star
    std::vector<double> cond_rows_psi;                // nx rows of length ny
    std::vector<double> cond_rows_phi;                // ny rows of length nx
    double grad_phi0_abs = 0.0, grad_psi0_abs = 0.0;
    double int_phi_mu = 0.0, int_psi_nu = 0.0;  // reference potential averages
};

ReferenceSolution reference_from_potentials(const SinkhornProblem& p, std::vector<double> phi_star,
                                            std::vector<double> psi_star);

// Mean-matched iterates: shifts phi (psi) by the gap between its average and
// the reference average, so additive constants drop out of comparisons.
std::pair<std::vector<double>, std::vector<double>> normalize_iterates(
    const SinkhornProblem& p, std::span<const double> phi_n, std::span<const double> psi_n,
    const ReferenceSolution& ref);

}  // namespace eotlab
