#include "eotlab/run.hpp"

#include <cmath>

namespace eotlab {

ReferenceSolution reference_from_oracle(const SinkhornProblem& p, const GaussianEOT& sol) {
    std::vector<double> phi(p.mu.grid.size()), psi(p.nu.grid.size());
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = sol.phi(p.mu.grid.nodes[i]);
    for (std::size_t j = 0; j < psi.size(); ++j) psi[j] = sol.psi(p.nu.grid.nodes[j]);
    return reference_from_potentials(p, std::move(phi), std::move(psi));
}

ReferenceSolution reference_long_run(const SinkhornProblem& p, int max_iters, double stop_tol) {
    const HeatKernel kernel = HeatKernel::build(p);
    SinkhornState s = make_initial_state(p);
    std::vector<double> prev_psi = s.psi;
    for (int n = 0; n < max_iters; ++n) {
        sinkhorn_step(p, kernel, s);
        double delta = 0.0;
        for (std::size_t j = 0; j < s.psi.size(); ++j)
            delta = std::max(delta, std::abs(s.psi[j] - prev_psi[j]));
        prev_psi = s.psi;
        if (delta < stop_tol) break;
    }
    // Symmetric normalization: shift the pair so both entropy-adjusted
    // potential averages coincide.
    double avg_phi = 0.0, avg_psi = 0.0;
    for (std::size_t i = 0; i < s.phi.size(); ++i) avg_phi += p.mu.density_weights[i] * s.phi[i];
    for (std::size_t j = 0; j < s.psi.size(); ++j) avg_psi += p.nu.density_weights[j] * s.psi[j];
    const double a = 0.5 * ((avg_psi + entropy(p.nu)) - (avg_phi + entropy(p.mu)));
    for (double& v : s.phi) v += a;
    for (double& v : s.psi) v -= a;
    return reference_from_potentials(p, std::move(s.phi), std::move(s.psi));
}

namespace {

// values shifted so their weighted average equals ref_avg.
std::vector<double> mean_match(std::span<const double> values, std::span<const double> weights,
                               double ref_avg) {
    double avg = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) avg += weights[i] * values[i];
    std::vector<double> out(values.begin(), values.end());
    const double shift = avg - ref_avg;
    for (double& v : out) v -= shift;
    return out;
}

}  // namespace

// With the null start psi0 equals the nu potential, so the gap against the
// reference gradient is the conditional-mean displacement alone; a custom
// start is differenced through a monotone cubic fit of its table.
std::vector<double> initial_psi_gradient_gap(const SinkhornProblem& p,
                                             const ReferenceSolution& ref,
                                             std::span<const double> psi0) {
    const std::size_t ny = p.nu.grid.size();
    const bool custom_start = !psi0.empty();
    std::vector<double> gap(ny);
    Pchip fit;
    if (custom_start)
        fit = Pchip(p.nu.grid.nodes, std::vector<double>(psi0.begin(), psi0.end()));
    for (std::size_t j = 0; j < ny; ++j) {
        const double y = p.nu.grid.nodes[j];
        const double ref_grad = p.nu.U1(y) + (ref.cond_mean_phi[j] - y) / p.T;
        const double start_grad = custom_start ? fit.deriv(y) : p.nu.U1(y);
        gap[j] = std::abs(start_grad - ref_grad);
    }
    return gap;
}

RunResult run_sinkhorn(const SinkhornProblem& p, const ReferenceSolution& ref, double A, double B,
                       std::span<const double> gamma_mu, std::span<const double> gamma_nu,
                       const RunOptions& opt) {
    const HeatKernel kernel = HeatKernel::build(p);
    SinkhornState s = make_initial_state(p, opt.psi0);
    const bool custom_start = !opt.psi0.empty();
    const std::vector<double> probe =
        opt.hess_probe.empty() ? std::vector<double>{-2.0, -1.0, 0.0, 1.0, 2.0} : opt.hess_probe;

    RunResult out;
    const double T = p.T;
    const auto& mu_w = p.mu.density_weights;
    const auto& nu_w = p.nu.density_weights;

    std::vector<double> ref_var_probe(probe.size());
    for (std::size_t k = 0; k < probe.size(); ++k)
        ref_var_probe[k] = conditional_stats(probe[k], ref.psi_star, p.nu.grid, T).var;

    auto sym_ent_nn_of = [&](std::span<const double> phi_n, std::span<const double> mu_n) {
        const auto phi_d = mean_match(phi_n, mu_w, ref.int_phi_mu);
        std::vector<double> diff(phi_d.size());
        for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = phi_d[i] - ref.phi_star[i];
        return std::max(0.0, sym_entropy_from_potentials(diff, mu_w, mu_n));
    };
    auto sym_ent_n1n_of = [&](std::span<const double> psi_n, std::span<const double> nu_n) {
        const auto psi_d = mean_match(psi_n, nu_w, ref.int_psi_nu);
        std::vector<double> diff(psi_d.size());
        for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = psi_d[j] - ref.psi_star[j];
        return std::max(0.0, sym_entropy_from_potentials(diff, nu_w, nu_n));
    };

    auto snapshot = [&]() {
        if (opt.keep_snapshots) out.snapshots.push_back({s.phi, s.psi});
    };

    // Row 0: the start; phi is identically zero by convention.
    {
        ConvergenceRecord r;
        r.n = 0;
        const auto gap = initial_psi_gradient_gap(
            p, ref, custom_start ? std::span<const double>(s.psi) : std::span<const double>());
        for (std::size_t j = 0; j < gap.size(); ++j) {
            r.l1_grad_nu += nu_w[j] * gap[j];
            r.pointwise_ratio_max = std::max(
                r.pointwise_ratio_max, gap[j] / (A * std::abs(p.nu.grid.nodes[j]) + B));
        }
        for (std::size_t i = 0; i < mu_w.size(); ++i) {
            const double x = p.mu.grid.nodes[i];
            r.l1_grad_mu += mu_w[i] * std::abs(p.mu.U1(x) + (ref.cond_mean_psi[i] - x) / T);
        }
        r.w1_plan_n1n = w1_plan_bound_n1n(p, s.psi, ref);
        r.w1_plan_nn = w1_plan_bound_nn(p, s.phi, ref);
        const Plan2D plan0 = build_plan(p, kernel, s.phi, s.psi);
        const auto mu0 = plan0.row_sums();
        r.h_mu_n = kl(mu0, mu_w).value;
        r.sym_ent_nn = sym_ent_nn_of(s.phi, mu0);
        for (std::size_t k = 0; k < probe.size(); ++k) {
            const double ref_hess = p.mu.U2(probe[k]) - 1.0 / T + ref_var_probe[k] / (T * T);
            r.hess_err_max = std::max(r.hess_err_max, std::abs(ref_hess));
        }
        r.predicted_product_bound = 1.0;
        out.history.push_back(r);
        snapshot();
    }

    double product = 1.0;
    int growth_streak = 0;
    for (int n = 1; n <= opt.max_iters; ++n) {
        sinkhorn_step(p, kernel, s);
        snapshot();

        ConvergenceRecord r;
        r.n = n;
        if (!gamma_mu.empty() && !gamma_nu.empty()) {
            const std::size_t k = std::min<std::size_t>(n - 1, gamma_mu.size() - 1);
            const std::size_t l = std::min<std::size_t>(n - 1, gamma_nu.size() - 1);
            product *= gamma_mu[k] * gamma_nu[l] / (T * T);
        }
        r.predicted_product_bound = product;

        r.l1_grad_mu = l1_phi_grad_error(p, s.psi_prev, ref);
        r.l1_grad_nu = l1_psi_grad_error(p, s.phi, ref);
        r.pointwise_ratio_max = pointwise_ratio_max(p, s.phi, ref, A, B);
        r.w1_plan_nn = w1_plan_bound_nn(p, s.phi, ref);
        r.w1_plan_n1n = w1_plan_bound_n1n(p, s.psi, ref);

        const Plan2D plan_nn = build_plan(p, kernel, s.phi, s.psi);
        const auto mu_n = plan_nn.row_sums();
        r.h_mu_n = kl(mu_n, mu_w).value;
        r.sym_ent_nn = sym_ent_nn_of(s.phi, mu_n);

        // The lagged plan pairs the fresh phi with the previous psi; its nu
        // marginal belongs to the previous row.
        {
            const Plan2D plan_lag = build_plan(p, kernel, s.phi, s.psi_prev);
            const auto nu_prev = plan_lag.col_sums();
            auto& prev_row = out.history.back();
            prev_row.h_nu_n = kl(nu_prev, nu_w).value;
            prev_row.sym_ent_n1n = sym_ent_n1n_of(s.psi_prev, nu_prev);
        }

        for (std::size_t k = 0; k < probe.size(); ++k) {
            const double it_var = conditional_stats(probe[k], s.psi_prev, p.nu.grid, T).var;
            r.hess_err_max =
                std::max(r.hess_err_max, std::abs(it_var - ref_var_probe[k]) / (T * T));
        }

        growth_streak = r.l1_grad_nu > out.history.back().l1_grad_nu ? growth_streak + 1 : 0;
        out.history.push_back(r);
        out.iterations = n;
        if (growth_streak >= 5) {
            out.diverged = true;
            break;
        }
        if (r.l1_grad_nu < opt.stop_tol) break;
    }

    // Backfill the final row's lagged-plan quantities with one extra step on a
    // scratch state.
    {
        SinkhornState scratch = s;
        sinkhorn_step(p, kernel, scratch);
        const Plan2D plan_lag = build_plan(p, kernel, scratch.phi, s.psi);
        const auto nu_last = plan_lag.col_sums();
        auto& last = out.history.back();
        last.h_nu_n = kl(nu_last, nu_w).value;
        last.sym_ent_n1n = sym_ent_n1n_of(s.psi, nu_last);
    }

    out.h_mu_first = out.history.size() > 1 ? out.history[1].h_mu_n : out.history[0].h_mu_n;
    out.h_nu_first = out.history[0].h_nu_n;
    return out;
}

}  // namespace eotlab
