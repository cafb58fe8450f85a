#include <doctest.h>

#include <cmath>
#include <numeric>

#include "eotlab/oracle.hpp"
#include "eotlab/run.hpp"

using namespace eotlab;

namespace {

SinkhornProblem unit_problem(double T, int n_nodes = 512) {
    return make_problem(normalize(make_gaussian(0.0, 1.0), n_nodes),
                        normalize(make_gaussian(0.0, 1.0), n_nodes), T);
}

std::vector<double> quadratic_on(const Grid& g, double a, double b = 0.0, double c = 0.0) {
    std::vector<double> h(g.size());
    for (std::size_t j = 0; j < h.size(); ++j) {
        const double y = g.nodes[j];
        h[j] = 0.5 * a * y * y + b * y + c;
    }
    return h;
}

}  // namespace

TEST_CASE("heat transform of the zero potential vanishes") {
    // The grid must cover the kernel mass around each probe point.
    const Grid g = uniform_grid(-16.0, 16.0, 2401);
    const std::vector<double> h(g.size(), 0.0);
    for (double x : {-5.0, -1.0, 0.0, 2.5, 5.0})
        CHECK(heat_log_transform(h, g, 2.0, x) == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("heat transform of a quadratic matches the closed form") {
    const Grid g = uniform_grid(-12.0, 12.0, 1601);
    const double T = 2.0;
    for (double a : {0.4, 1.0, 2.0}) {
        const auto h = quadratic_on(g, a);
        for (double x : {-3.0, -0.7, 0.0, 1.2, 3.0}) {
            const double expected =
                -a * x * x / (2.0 * (1.0 + T * a)) - 0.5 * std::log(1.0 + T * a);
            CHECK(heat_log_transform(h, g, T, x) == doctest::Approx(expected).epsilon(1e-9));
        }
    }
}

TEST_CASE("heat transform commutes with translation of the potential") {
    const Grid g = uniform_grid(-14.0, 14.0, 2001);
    const double T = 1.5, a = 0.8, m = 1.7;
    std::vector<double> h(g.size()), hm(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
        h[j] = 0.5 * a * g.nodes[j] * g.nodes[j];
        hm[j] = 0.5 * a * (g.nodes[j] - m) * (g.nodes[j] - m);
    }
    for (double x : {-2.0, 0.0, 1.0, 3.0})
        CHECK(heat_log_transform(hm, g, T, x) ==
              doctest::Approx(heat_log_transform(h, g, T, x - m)).epsilon(1e-9));
}

TEST_CASE("conditional moments of a quadratic potential") {
    const Grid g = uniform_grid(-12.0, 12.0, 1601);
    const double T = 2.0, a = 0.9;
    const auto h = quadratic_on(g, a);
    for (double x : {-2.0, 0.0, 0.5, 3.0}) {
        const auto mv = conditional_stats(x, h, g, T);
        CHECK(mv.mean == doctest::Approx(x / (1.0 + T * a)).epsilon(1e-8));
        CHECK(mv.var == doctest::Approx(T / (1.0 + T * a)).epsilon(1e-8));
    }

    // Flat potential: the conditional is the kernel itself.
    const std::vector<double> zero(g.size(), 0.0);
    const auto mv0 = conditional_stats(0.5, zero, g, T);
    CHECK(mv0.mean == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(mv0.var == doctest::Approx(T).epsilon(1e-7));

    // Even potential at the origin gives a symmetric conditional.
    const auto w = conditional_measure(0.0, h, g, T);
    for (std::size_t j = 0; j < w.size() / 2; ++j)
        CHECK(w[j] == doctest::Approx(w[w.size() - 1 - j]).epsilon(1e-10));
    CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("transform derivatives: closed forms and finite-difference oracles") {
    const Grid g = uniform_grid(-12.0, 12.0, 1601);
    const double T = 2.0, a = 0.9;
    const auto h = quadratic_on(g, a);

    for (double x : {-2.0, 0.0, 1.3}) {
        CHECK(grad_potential(x, h, g, T) == doctest::Approx(-a * x / (1.0 + T * a)).epsilon(1e-8));
        CHECK(hess_potential(x, h, g, T) == doctest::Approx(-a / (1.0 + T * a)).epsilon(1e-8));
    }
    CHECK(grad_potential(0.0, h, g, T) == doctest::Approx(0.0));
    const std::vector<double> zero(g.size(), 0.0);
    CHECK(hess_potential(1.0, zero, g, T) == doctest::Approx(0.0).epsilon(1e-8));

    // Central differences of the transform reproduce the moment formulas, for
    // a quadratic and for a perturbed potential.
    auto check_fd = [&](const std::vector<double>& pot) {
        const double step = 1e-5;
        for (double x = -3.0; x <= 3.0; x += 0.5) {
            const double fd_grad = (heat_log_transform(pot, g, T, x + step) -
                                    heat_log_transform(pot, g, T, x - step)) /
                                   (2.0 * step);
            CHECK(grad_potential(x, pot, g, T) == doctest::Approx(fd_grad).epsilon(1e-6));
            const double fd_hess =
                (grad_potential(x + step, pot, g, T) - grad_potential(x - step, pot, g, T)) /
                (2.0 * step);
            CHECK(hess_potential(x, pot, g, T) == doctest::Approx(fd_hess).epsilon(1e-6));
        }
    };
    check_fd(h);
    std::vector<double> wavy(g.size());
    for (std::size_t j = 0; j < g.size(); ++j)
        wavy[j] = 0.5 * g.nodes[j] * g.nodes[j] + 0.1 * std::cos(2.0 * g.nodes[j]);
    check_fd(wavy);
}

TEST_CASE("one alternating step propagates quadratic curvature") {
    const auto prob = unit_problem(2.0);
    const HeatKernel kernel = HeatKernel::build(prob);
    SinkhornState s = make_initial_state(prob);
    CHECK(s.n == 0);
    // The null start places the nu potential (with normalizer) on the nu grid.
    for (std::size_t j = 0; j < prob.nu.grid.size(); j += 100)
        CHECK(s.psi[j] == doctest::Approx(prob.nu.potential_true(prob.nu.grid.nodes[j])));

    sinkhorn_step(prob, kernel, s);
    CHECK(s.n == 1);
    // Fresh phi curvature: the Gaussian start contracts 1 to 1 - 1/(1+T) = 2/3.
    const double hess_phi1 =
        prob.mu.U2(0.0) + hess_potential(0.0, s.psi_prev, prob.nu.grid, prob.T);
    CHECK(hess_phi1 == doctest::Approx(2.0 / 3.0).epsilon(1e-7));
}

TEST_CASE("the closed-form pair is stationary on the grid") {
    // A tighter-than-default truncation keeps the conditional mass of every
    // node inside the grid, so the analytic pair is stationary at full
    // accuracy all the way to the edges.
    const auto prob = make_problem(normalize(make_gaussian(0.0, 1.0), 1536, 1e-20),
                                   normalize(make_gaussian(0.0, 1.0), 1536, 1e-20), 2.0);
    const HeatKernel kernel = HeatKernel::build(prob);
    const auto sol = solve_gaussian(0.0, 1.0, 0.0, 1.0, 2.0);
    SinkhornState s;
    s.phi.resize(prob.mu.grid.size());
    s.psi.resize(prob.nu.grid.size());
    for (std::size_t i = 0; i < s.phi.size(); ++i) s.phi[i] = sol.phi(prob.mu.grid.nodes[i]);
    for (std::size_t j = 0; j < s.psi.size(); ++j) s.psi[j] = sol.psi(prob.nu.grid.nodes[j]);
    s.psi_prev = s.psi;
    const auto phi_before = s.phi;
    const auto psi_before = s.psi;
    sinkhorn_step(prob, kernel, s);
    double worst = 0.0;
    for (std::size_t i = 0; i < s.phi.size(); ++i)
        worst = std::max(worst, std::abs(s.phi[i] - phi_before[i]));
    for (std::size_t j = 0; j < s.psi.size(); ++j)
        worst = std::max(worst, std::abs(s.psi[j] - psi_before[j]));
    CHECK(worst < 1e-8);
}

TEST_CASE("plan marginals and total mass") {
    const auto prob = unit_problem(2.0);
    const HeatKernel kernel = HeatKernel::build(prob);

    SUBCASE("after a psi half-step the nu marginal is exact") {
        SinkhornState s = make_initial_state(prob);
        sinkhorn_step(prob, kernel, s);
        const Plan2D plan = build_plan(prob, kernel, s.phi, s.psi);
        const auto cols = plan.col_sums();
        for (std::size_t j = 0; j < cols.size(); j += 7)
            CHECK(cols[j] == doctest::Approx(prob.nu.density_weights[j]).epsilon(1e-11));
        const double mass = std::accumulate(plan.w.begin(), plan.w.end(), 0.0);
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("at the closed-form pair both marginals are recovered") {
        const auto sol = solve_gaussian(0.0, 1.0, 0.0, 1.0, 2.0);
        std::vector<double> phi(prob.mu.grid.size()), psi(prob.nu.grid.size());
        for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = sol.phi(prob.mu.grid.nodes[i]);
        for (std::size_t j = 0; j < psi.size(); ++j) psi[j] = sol.psi(prob.nu.grid.nodes[j]);
        const Plan2D plan = build_plan(prob, kernel, phi, psi);
        const auto rows = plan.row_sums();
        const auto cols = plan.col_sums();
        double worst = 0.0;
        for (std::size_t i = 0; i < rows.size(); ++i)
            worst = std::max(worst, std::abs(rows[i] - prob.mu.density_weights[i]));
        for (std::size_t j = 0; j < cols.size(); ++j)
            worst = std::max(worst, std::abs(cols[j] - prob.nu.density_weights[j]));
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("mean-matched iterates: invariance, convergence, common normalization level") {
    const auto prob = make_problem(normalize(make_gaussian(0.0, 1.0), 1536, 1e-20),
                                   normalize(make_gaussian(0.0, 1.0), 1536, 1e-20), 2.0);
    const auto sol = solve_gaussian(0.0, 1.0, 0.0, 1.0, 2.0);
    const auto ref = reference_from_oracle(prob, sol);
    const HeatKernel kernel = HeatKernel::build(prob);

    SinkhornState s = make_initial_state(prob);
    for (int n = 0; n < 12; ++n) sinkhorn_step(prob, kernel, s);

    const auto [phi_d, psi_d] = normalize_iterates(prob, s.phi, s.psi, ref);

    SUBCASE("constant shifts cancel") {
        auto shifted = s.phi;
        for (double& v : shifted) v += 3.7;
        const auto [phi_d2, psi_d2] = normalize_iterates(prob, shifted, s.psi, ref);
        for (std::size_t i = 0; i < phi_d.size(); i += 97)
            CHECK(phi_d2[i] == doctest::Approx(phi_d[i]).epsilon(1e-12));
    }

    SUBCASE("converged iterates match the reference pointwise") {
        double worst = 0.0;
        for (std::size_t i = 0; i < phi_d.size(); ++i)
            worst = std::max(worst, std::abs(phi_d[i] - ref.phi_star[i]));
        for (std::size_t j = 0; j < psi_d.size(); ++j)
            worst = std::max(worst, std::abs(psi_d[j] - ref.psi_star[j]));
        CHECK(worst < 1e-8);
    }

    SUBCASE("the matched average sits at the symmetric normalization level") {
        // Both entropy-adjusted averages equal half of (entropies minus the
        // plan divergence from the heat reference).
        const Plan2D plan = build_plan(prob, kernel, ref.phi_star, ref.psi_star);
        double h_ref = 0.0;  // plan divergence from the unnormalized heat kernel
        for (std::size_t i = 0; i < plan.nx; ++i)
            for (std::size_t j = 0; j < plan.ny; ++j) {
                const double w = plan.at(i, j);
                if (w <= 0.0) continue;
                const double log_r = kernel.at(i, j) - kernel.log_gauss_norm +
                                     std::log(prob.mu.grid.weights[i]) +
                                     std::log(prob.nu.grid.weights[j]);
                h_ref += w * (plan.logw[i * plan.ny + j] - log_r);
            }
        const double lhs = ref.int_phi_mu + entropy(prob.mu);
        const double rhs = 0.5 * (entropy(prob.mu) + entropy(prob.nu) - h_ref);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
        CHECK(ref.int_psi_nu + entropy(prob.nu) == doctest::Approx(rhs).epsilon(1e-6));
    }
}

TEST_CASE("convexity floors propagate along the iteration") {
    const auto prob = unit_problem(2.0);
    const auto params = rate_params_from(prob.mu, prob.nu, prob.T);
    const auto sched = alpha_sequence(params, Side::Nu, 10, 1e-12);
    const HeatKernel kernel = HeatKernel::build(prob);
    SinkhornState s = make_initial_state(prob);
    for (int n = 1; n <= 8; ++n) {
        sinkhorn_step(prob, kernel, s);
        double min_curv = 1e300;
        for (double y = -4.0; y <= 4.0; y += 0.5)
            min_curv = std::min(
                min_curv, prob.nu.U2(y) + hess_potential(y, s.phi, prob.mu.grid, prob.T));
        CHECK(min_curv >= sched.values[std::min<std::size_t>(n, sched.values.size() - 1)] - 1e-6);
    }
}

TEST_CASE("divergence flag trips on a growing error sequence") {
    // Using the first iterate as the "reference" makes the recorded gap grow
    // monotonically while the true iteration drifts away from it; the driver
    // should flag the growth rather than loop to the cap.
    const auto prob = unit_problem(2.0, 256);
    const HeatKernel kernel = HeatKernel::build(prob);
    SinkhornState one = make_initial_state(prob);
    sinkhorn_step(prob, kernel, one);
    const auto ref = reference_from_potentials(prob, one.phi, one.psi);
    RunOptions opt;
    opt.max_iters = 30;
    opt.stop_tol = 0.0;
    const auto res = run_sinkhorn(prob, ref, 1.0, 1.0, {}, {}, opt);
    CHECK(res.diverged);
    CHECK(res.iterations < opt.max_iters);
}
