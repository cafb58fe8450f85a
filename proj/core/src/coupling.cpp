#include "eotlab/coupling.hpp"

#include <cmath>
#include <stdexcept>

namespace eotlab {

namespace {

double w1_prefactor(const Marginal1D& p) {
    const auto& g = p.g_tilde;
    if (g.is_zero()) return 1.0 / p.alpha;  // synchronous-coupling limit of the profile factor
    const double s0 = g.slope_at_zero();
    const double R = g.sup_norm() * (1.0 / s0 + 2.0 / p.alpha);
    const double dR = g.deriv(R);
    return (s0 / dR) * (s0 / dR) / (p.alpha + s0);
}

}  // namespace

CouplingCheck theorem_w1_score_check(const Marginal1D& p, const Marginal1D& q, double rel_tol) {
    if (!p.normalized || !q.normalized)
        throw std::logic_error("theorem_w1_score_check: marginals must be normalized");
    CouplingCheck out;
    out.lhs = w1_1d(p.density_weights, p.grid.nodes, q.density_weights, q.grid.nodes);
    double score = 0.0;
    for (std::size_t j = 0; j < q.grid.size(); ++j) {
        const double y = q.grid.nodes[j];
        score += q.density_weights[j] * std::abs(p.U1(y) - q.U1(y));
    }
    out.rhs = w1_prefactor(p) * score;
    out.pass = out.lhs <= out.rhs * (1.0 + rel_tol);
    return out;
}

CouplingCheck conditional_contraction_check(const SinkhornProblem& prob,
                                            std::span<const double> psi_n,
                                            std::span<const double> phi_n,
                                            const ReferenceSolution& ref, double x, double gamma_n,
                                            double rel_tol) {
    CouplingCheck out;
    const auto iter_cond = conditional_measure(x, psi_n, prob.nu.grid, prob.T);
    const auto ref_cond = conditional_measure(x, ref.psi_star, prob.nu.grid, prob.T);
    out.lhs = w1_1d_shared(iter_cond, ref_cond, prob.nu.grid.nodes);
    // psi-gradient gap integrated against the reference conditional at x.
    double integral = 0.0;
    for (std::size_t j = 0; j < prob.nu.grid.size(); ++j) {
        const double y = prob.nu.grid.nodes[j];
        const double m_iter = conditional_stats(y, phi_n, prob.mu.grid, prob.T).mean;
        integral += ref_cond[j] * std::abs(m_iter - ref.cond_mean_phi[j]) / prob.T;
    }
    out.rhs = gamma_n * integral;
    out.pass = out.lhs <= out.rhs * (1.0 + rel_tol) + 1e-14;
    return out;
}

namespace {

// Deterministic 64-bit mix (splitmix64) feeding uniforms in [0, 1).
struct MixRng {
    unsigned long long state;
    explicit MixRng(unsigned long long seed) : state(seed) {}
    double uniform() {
        state += 0x9E3779B97F4A7C15ull;
        unsigned long long z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        z = z ^ (z >> 31);
        return static_cast<double>(z >> 11) * 0x1.0p-53;
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
};

}  // namespace

CouplingSuiteResult coupling_suite(const RandomPairConfig& cfg) {
    MixRng rng(cfg.seed);
    CouplingSuiteResult out;
    out.cases.reserve(cfg.n_pairs);
    const std::vector<double> radii = {0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
    for (int c = 0; c < cfg.n_pairs; ++c) {
        auto draw = [&](bool allow_perturbed) {
            const double mean = rng.uniform(cfg.mean_lo, cfg.mean_hi);
            const double var = rng.uniform(cfg.var_lo, cfg.var_hi);
            const bool perturbed = allow_perturbed && rng.uniform() < 0.5;
            if (!perturbed) return make_gaussian(mean, var);
            const double amp = rng.uniform(0.0, cfg.amp_hi);
            const double freq = rng.uniform(0.5, cfg.freq_hi);
            return make_perturbed_gaussian(mean, var, amp, freq);
        };
        Marginal1D p = normalize(draw(true), cfg.n_nodes);
        Marginal1D q = normalize(draw(true), cfg.n_nodes);
        // Profile data must not be falsified on a sample before the inequality
        // is asserted.
        std::vector<double> samples;
        for (double x = -6.0; x <= 6.0; x += 0.125) samples.push_back(x);
        if (!verify_alc(p.U1, p.alpha, p.g_tilde, radii, samples))
            throw std::runtime_error("coupling_suite: profile data falsified on sample");
        out.cases.push_back(theorem_w1_score_check(p, q));
        if (!out.cases.back().pass) ++out.failures;
    }
    return out;
}

}  // namespace eotlab
