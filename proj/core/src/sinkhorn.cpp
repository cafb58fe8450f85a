#include "eotlab/sinkhorn.hpp"

#include <cmath>
#include <stdexcept>

namespace eotlab {

SinkhornProblem make_problem(Marginal1D mu, Marginal1D nu, double T) {
    if (!(T > 0.0)) throw std::domain_error("make_problem: T must be positive");
    if (!mu.normalized || !nu.normalized)
        throw std::logic_error("make_problem: marginals must be normalized");
    return SinkhornProblem{std::move(mu), std::move(nu), T};
}

namespace {

struct CondAccum {
    double m = -std::numeric_limits<double>::infinity();
    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
};

// Two passes over the grid: running max, then shifted-exponential moments.
CondAccum conditional_accumulate(double x, std::span<const double> h, const Grid& g, double T) {
    const std::size_t n = g.size();
    if (h.size() != n) throw std::invalid_argument("conditional: h/grid size mismatch");
    const double inv2T = 0.5 / T;
    CondAccum acc;
    std::vector<double> t(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double d = x - g.nodes[j];
        t[j] = -d * d * inv2T - h[j] + std::log(g.weights[j]);
        acc.m = std::max(acc.m, t[j]);
    }
    if (!std::isfinite(acc.m)) throw std::runtime_error("conditional: all mass underflowed");
    for (std::size_t j = 0; j < n; ++j) {
        const double e = std::exp(t[j] - acc.m);
        acc.s0 += e;
        acc.s1 += e * g.nodes[j];
        acc.s2 += e * g.nodes[j] * g.nodes[j];
    }
    return acc;
}

}  // namespace

double heat_log_transform(std::span<const double> h, const Grid& g, double T, double x) {
    const auto acc = conditional_accumulate(x, h, g, T);
    return acc.m + std::log(acc.s0) - 0.5 * std::log(2.0 * M_PI * T);
}

MeanVar conditional_stats(double x, std::span<const double> h, const Grid& g, double T) {
    const auto acc = conditional_accumulate(x, h, g, T);
    MeanVar out;
    out.mean = acc.s1 / acc.s0;
    out.var = std::max(0.0, acc.s2 / acc.s0 - out.mean * out.mean);
    out.log_norm = acc.m + std::log(acc.s0) - 0.5 * std::log(2.0 * M_PI * T);
    return out;
}

std::vector<double> conditional_measure(double x, std::span<const double> h, const Grid& g,
                                        double T) {
    const std::size_t n = g.size();
    std::vector<double> t(n);
    const double inv2T = 0.5 / T;
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        const double d = x - g.nodes[j];
        t[j] = -d * d * inv2T - h[j] + std::log(g.weights[j]);
        m = std::max(m, t[j]);
    }
    if (!std::isfinite(m)) throw std::runtime_error("conditional_measure: all mass underflowed");
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        t[j] = std::exp(t[j] - m);
        s += t[j];
    }
    for (double& v : t) v /= s;
    return t;
}

double grad_potential(double x, std::span<const double> h, const Grid& g, double T) {
    return (conditional_stats(x, h, g, T).mean - x) / T;
}

double hess_potential(double x, std::span<const double> h, const Grid& g, double T) {
    return -1.0 / T + conditional_stats(x, h, g, T).var / (T * T);
}

HeatKernel HeatKernel::build(const SinkhornProblem& p) {
    HeatKernel k;
    k.nx = p.mu.grid.size();
    k.ny = p.nu.grid.size();
    k.log_gauss_norm = 0.5 * std::log(2.0 * M_PI * p.T);
    k.log_k.resize(k.nx * k.ny);
    const double inv2T = 0.5 / p.T;
    parallel_for(k.nx, [&](std::size_t beg, std::size_t end) {
        for (std::size_t i = beg; i < end; ++i) {
            const double x = p.mu.grid.nodes[i];
            double* row = &k.log_k[i * k.ny];
            for (std::size_t j = 0; j < k.ny; ++j) {
                const double d = x - p.nu.grid.nodes[j];
                row[j] = -d * d * inv2T;
            }
        }
    });
    return k;
}

SinkhornState make_initial_state(const SinkhornProblem& p, std::span<const double> psi0) {
    SinkhornState s;
    s.n = 0;
    s.phi.assign(p.mu.grid.size(), 0.0);
    const std::size_t ny = p.nu.grid.size();
    s.psi.resize(ny);
    if (psi0.empty()) {
        for (std::size_t j = 0; j < ny; ++j) s.psi[j] = p.nu.potential_true(p.nu.grid.nodes[j]);
    } else {
        if (psi0.size() != ny) throw std::invalid_argument("make_initial_state: psi0 size mismatch");
        s.psi.assign(psi0.begin(), psi0.end());
    }
    s.psi_prev = s.psi;
    return s;
}

void sinkhorn_step(const SinkhornProblem& p, const HeatKernel& k, SinkhornState& s) {
    const std::size_t nx = k.nx, ny = k.ny;
    std::vector<double> log_wnu(ny), log_wmu(nx);
    for (std::size_t j = 0; j < ny; ++j) log_wnu[j] = std::log(p.nu.grid.weights[j]);
    for (std::size_t i = 0; i < nx; ++i) log_wmu[i] = std::log(p.mu.grid.weights[i]);

    std::vector<double> phi_new(nx);
    parallel_for(nx, [&](std::size_t beg, std::size_t end) {
        for (std::size_t i = beg; i < end; ++i) {
            const double* row = &k.log_k[i * ny];
            const double lse = log_sum_exp_terms(
                ny, [&](std::size_t j) { return row[j] - s.psi[j] + log_wnu[j]; });
            phi_new[i] =
                p.mu.potential_true(p.mu.grid.nodes[i]) + lse - k.log_gauss_norm;
        }
    });

    std::vector<double> psi_new(ny);
    parallel_for(ny, [&](std::size_t beg, std::size_t end) {
        for (std::size_t j = beg; j < end; ++j) {
            const double lse = log_sum_exp_terms(nx, [&](std::size_t i) {
                return k.log_k[i * ny + j] - phi_new[i] + log_wmu[i];
            });
            psi_new[j] = p.nu.potential_true(p.nu.grid.nodes[j]) + lse - k.log_gauss_norm;
        }
    });

    for (double v : phi_new)
        if (!std::isfinite(v)) throw std::runtime_error("sinkhorn_step: non-finite phi update");
    for (double v : psi_new)
        if (!std::isfinite(v)) throw std::runtime_error("sinkhorn_step: non-finite psi update");

    s.psi_prev = std::move(s.psi);
    s.phi = std::move(phi_new);
    s.psi = std::move(psi_new);
    s.n += 1;
}

std::vector<double> Plan2D::row_sums() const {
    std::vector<double> out(nx, 0.0);
    for (std::size_t i = 0; i < nx; ++i) {
        const double* row = &w[i * ny];
        double s = 0.0;
        for (std::size_t j = 0; j < ny; ++j) s += row[j];
        out[i] = s;
    }
    return out;
}

std::vector<double> Plan2D::col_sums() const {
    std::vector<double> out(ny, 0.0);
    for (std::size_t i = 0; i < nx; ++i) {
        const double* row = &w[i * ny];
        for (std::size_t j = 0; j < ny; ++j) out[j] += row[j];
    }
    return out;
}

Plan2D build_plan(const SinkhornProblem& p, const HeatKernel& k, std::span<const double> phi,
                  std::span<const double> psi) {
    Plan2D plan;
    plan.nx = k.nx;
    plan.ny = k.ny;
    plan.logw.resize(k.nx * k.ny);
    std::vector<double> log_wnu(k.ny), log_wmu(k.nx);
    for (std::size_t j = 0; j < k.ny; ++j) log_wnu[j] = std::log(p.nu.grid.weights[j]);
    for (std::size_t i = 0; i < k.nx; ++i) log_wmu[i] = std::log(p.mu.grid.weights[i]);
    parallel_for(k.nx, [&](std::size_t beg, std::size_t end) {
        for (std::size_t i = beg; i < end; ++i) {
            const double* row = &k.log_k[i * k.ny];
            double* out = &plan.logw[i * k.ny];
            for (std::size_t j = 0; j < k.ny; ++j)
                out[j] = row[j] - phi[i] - psi[j] + log_wmu[i] + log_wnu[j];
        }
    });
    const double total = log_sum_exp(plan.logw);
    plan.w.resize(plan.logw.size());
    for (std::size_t idx = 0; idx < plan.logw.size(); ++idx) {
        plan.logw[idx] -= total;
        plan.w[idx] = std::exp(plan.logw[idx]);
    }
    return plan;
}

ReferenceSolution reference_from_potentials(const SinkhornProblem& p, std::vector<double> phi_star,
                                            std::vector<double> psi_star) {
    const std::size_t nx = p.mu.grid.size(), ny = p.nu.grid.size();
    if (phi_star.size() != nx || psi_star.size() != ny)
        throw std::invalid_argument("reference_from_potentials: size mismatch");
    ReferenceSolution ref;
    ref.phi_star = std::move(phi_star);
    ref.psi_star = std::move(psi_star);
    ref.cond_mean_psi.resize(nx);
    ref.cond_var_psi.resize(nx);
    ref.cond_rows_psi.resize(nx * ny);
    parallel_for(nx, [&](std::size_t beg, std::size_t end) {
        for (std::size_t i = beg; i < end; ++i) {
            const double x = p.mu.grid.nodes[i];
            const auto mv = conditional_stats(x, ref.psi_star, p.nu.grid, p.T);
            ref.cond_mean_psi[i] = mv.mean;
            ref.cond_var_psi[i] = mv.var;
            auto row = conditional_measure(x, ref.psi_star, p.nu.grid, p.T);
            std::copy(row.begin(), row.end(), ref.cond_rows_psi.begin() + i * ny);
        }
    });
    ref.cond_mean_phi.resize(ny);
    ref.cond_var_phi.resize(ny);
    ref.cond_rows_phi.resize(ny * nx);
    parallel_for(ny, [&](std::size_t beg, std::size_t end) {
        for (std::size_t j = beg; j < end; ++j) {
            const double y = p.nu.grid.nodes[j];
            const auto mv = conditional_stats(y, ref.phi_star, p.mu.grid, p.T);
            ref.cond_mean_phi[j] = mv.mean;
            ref.cond_var_phi[j] = mv.var;
            auto row = conditional_measure(y, ref.phi_star, p.mu.grid, p.T);
            std::copy(row.begin(), row.end(), ref.cond_rows_phi.begin() + j * nx);
        }
    });
    ref.grad_phi0_abs =
        std::abs(p.mu.U1(0.0) + grad_potential(0.0, ref.psi_star, p.nu.grid, p.T));
    ref.grad_psi0_abs =
        std::abs(p.nu.U1(0.0) + grad_potential(0.0, ref.phi_star, p.mu.grid, p.T));
    for (std::size_t i = 0; i < nx; ++i)
        ref.int_phi_mu += p.mu.density_weights[i] * ref.phi_star[i];
    for (std::size_t j = 0; j < ny; ++j)
        ref.int_psi_nu += p.nu.density_weights[j] * ref.psi_star[j];
    return ref;
}

std::pair<std::vector<double>, std::vector<double>> normalize_iterates(
    const SinkhornProblem& p, std::span<const double> phi_n, std::span<const double> psi_n,
    const ReferenceSolution& ref) {
    double avg_phi = 0.0, avg_psi = 0.0;
    for (std::size_t i = 0; i < phi_n.size(); ++i) avg_phi += p.mu.density_weights[i] * phi_n[i];
    for (std::size_t j = 0; j < psi_n.size(); ++j) avg_psi += p.nu.density_weights[j] * psi_n[j];
    std::vector<double> phi_d(phi_n.begin(), phi_n.end());
    std::vector<double> psi_d(psi_n.begin(), psi_n.end());
    const double shift_phi = avg_phi - ref.int_phi_mu;
    const double shift_psi = avg_psi - ref.int_psi_nu;
    for (double& v : phi_d) v -= shift_phi;
    for (double& v : psi_d) v -= shift_psi;
    return {std::move(phi_d), std::move(psi_d)};
}

}  // namespace eotlab
