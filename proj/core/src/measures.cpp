#include "eotlab/measures.hpp"

#include <cmath>
#include <stdexcept>

namespace eotlab {

Grid uniform_grid(double lo, double hi, int n_nodes) {
    if (n_nodes < 2 || !(hi > lo)) throw std::invalid_argument("uniform_grid: bad arguments");
    Grid g;
    g.lo = lo;
    g.hi = hi;
    const double h = (hi - lo) / (n_nodes - 1);
    g.nodes.resize(n_nodes);
    g.weights.assign(n_nodes, h);
    for (int i = 0; i < n_nodes; ++i) g.nodes[i] = lo + h * i;
    g.weights.front() = 0.5 * h;
    g.weights.back() = 0.5 * h;
    return g;
}

Marginal1D make_gaussian(double mean, double var) {
    if (!(var > 0.0)) throw std::domain_error("make_gaussian: variance must be positive");
    Marginal1D m;
    m.family = MarginalFamily::Gaussian;
    m.mean = mean;
    m.var = var;
    const double a = 1.0 / var;
    m.U = [mean, a](double x) { return 0.5 * a * (x - mean) * (x - mean); };
    m.U1 = [mean, a](double x) { return a * (x - mean); };
    m.U2 = [a](double) { return a; };
    m.alpha = a;
    m.beta = a;
    m.g_tilde = ProfileFunction::zero();
    m.g_small = ProfileFunction::zero();
    return m;
}

Marginal1D make_perturbed_gaussian(double mean, double var, double amplitude, double frequency,
                                   double profile_R) {
    if (!(var > 0.0)) throw std::domain_error("make_perturbed_gaussian: variance must be positive");
    if (amplitude < 0.0 || frequency < 0.0)
        throw std::domain_error("make_perturbed_gaussian: negative perturbation parameters");
    Marginal1D m;
    m.family = MarginalFamily::PerturbedGaussian;
    m.mean = mean;
    m.var = var;
    m.amplitude = amplitude;
    m.frequency = frequency;
    const double a = 1.0 / var, amp = amplitude, om = frequency;
    m.U = [mean, a, amp, om](double x) {
        return 0.5 * a * (x - mean) * (x - mean) + amp * std::cos(om * x);
    };
    m.U1 = [mean, a, amp, om](double x) { return a * (x - mean) - amp * om * std::sin(om * x); };
    m.U2 = [a, amp, om](double x) { return a - amp * om * om * std::cos(om * x); };
    m.alpha = a;
    const double dip = amp * om * om;
    m.g_tilde = dip > 0.0 ? tanh_profile(solve_L(profile_R, dip)) : ProfileFunction::zero();
    m.beta = a + dip;
    m.g_small = ProfileFunction::zero();
    return m;
}

Marginal1D make_custom(std::function<double(double)> U, std::function<double(double)> U1,
                       std::function<double(double)> U2, double alpha, double beta,
                       ProfileFunction g_tilde, ProfileFunction g_small) {
    if (!(alpha > 0.0)) throw std::domain_error("make_custom: alpha must be positive");
    Marginal1D m;
    m.family = MarginalFamily::Custom;
    m.U = std::move(U);
    m.U1 = std::move(U1);
    m.U2 = std::move(U2);
    m.alpha = alpha;
    m.beta = beta;
    m.g_tilde = std::move(g_tilde);
    m.g_small = std::move(g_small);
    return m;
}

Grid build_grid(const Marginal1D& m, int n_nodes, double tail_budget) {
    if (n_nodes < 16) throw std::invalid_argument("build_grid: n_nodes must be >= 16");
    if (!(tail_budget > 0.0) || tail_budget > 1e-3)
        throw std::invalid_argument("build_grid: tail_budget outside (0, 1e-3]");
    // An odd node count puts the center (and with it the |x| kink of the
    // absolute moments) on a node, keeping the trapezoid rule spectrally
    // accurate for moment integrals.
    n_nodes |= 1;
    switch (m.family) {
        case MarginalFamily::Gaussian: {
            const double z = normal_tail_quantile(0.5 * tail_budget);
            const double half = z * std::sqrt(m.var);
            return uniform_grid(m.mean - half, m.mean + half, n_nodes);
        }
        case MarginalFamily::PerturbedGaussian: {
            // The potential differs from the Gaussian one by at most `amplitude`,
            // so the density ratio is controlled by exp(2*amplitude).
            const double budget = tail_budget * std::exp(-2.0 * m.amplitude);
            const double z = normal_tail_quantile(0.5 * budget);
            const double half = z * std::sqrt(m.var);
            return uniform_grid(m.mean - half, m.mean + half, n_nodes);
        }
        case MarginalFamily::Custom: {
            if (!(m.alpha > 0.0))
                throw std::invalid_argument("build_grid: custom family needs an alpha estimate");
            // Sub-Gaussian envelope with rate alpha/4: variance proxy 4/alpha,
            // widened by the linear-drift offset.
            const double z = normal_tail_quantile(0.5 * tail_budget);
            const double drift = (m.g_tilde.sup_norm() + std::abs(m.U1(0.0))) * 2.0 / m.alpha;
            const double half = z * 2.0 / std::sqrt(m.alpha) + drift;
            return uniform_grid(-half, half, n_nodes);
        }
    }
    throw std::logic_error("build_grid: unknown family");
}

Marginal1D normalize(Marginal1D m, int n_nodes, double tail_budget) {
    if (m.grid.size() == 0) m.grid = build_grid(m, n_nodes, tail_budget);
    const std::size_t n = m.grid.size();
    std::vector<double> log_terms(n);
    for (std::size_t i = 0; i < n; ++i)
        log_terms[i] = std::log(m.grid.weights[i]) - m.U(m.grid.nodes[i]);
    m.log_normalizer = log_sum_exp(log_terms);
    if (!std::isfinite(m.log_normalizer))
        throw std::runtime_error("normalize: all log densities are -inf");
    m.density_weights.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        m.density_weights[i] = std::exp(log_terms[i] - m.log_normalizer);
    m.normalized = true;
    return m;
}

double moment(const Marginal1D& m, int k) {
    if (!m.normalized) throw std::logic_error("moment: marginal not normalized");
    if (k < 1) throw std::invalid_argument("moment: k must be positive");
    double s = 0.0;
    for (std::size_t i = 0; i < m.grid.size(); ++i)
        s += m.density_weights[i] * std::pow(std::abs(m.grid.nodes[i]), k);
    return s;
}

double entropy(const Marginal1D& m) {
    if (!m.normalized) throw std::logic_error("entropy: marginal not normalized");
    double s = 0.0;
    for (std::size_t i = 0; i < m.grid.size(); ++i)
        s += m.density_weights[i] * (-m.U(m.grid.nodes[i]) - m.log_normalizer);
    return s;
}

ExpMoment exp_moment(const Marginal1D& m, double sigma) {
    if (!(sigma > 0.0)) throw std::domain_error("exp_moment: sigma must be positive");
    if (!m.normalized) throw std::logic_error("exp_moment: marginal not normalized");
    const std::size_t n = m.grid.size();
    const double v = log_sum_exp_terms(n, [&](std::size_t i) {
        const double x = m.grid.nodes[i];
        return sigma * x * x + std::log(m.density_weights[i]);
    });
    ExpMoment out;
    out.value = std::exp(v);
    out.divergence_risk = sigma >= 0.5 * m.alpha;
    return out;
}

}  // namespace eotlab
