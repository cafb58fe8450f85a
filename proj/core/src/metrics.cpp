#include "eotlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace eotlab {

namespace {

void check_normalized(std::span<const double> w, const char* who) {
    const double s = std::accumulate(w.begin(), w.end(), 0.0);
    if (std::abs(s - 1.0) > 1e-9) throw std::invalid_argument(std::string(who) + ": weights not normalized");
}

}  // namespace

double w1_1d(std::span<const double> p_weights, std::span<const double> p_nodes,
             std::span<const double> q_weights, std::span<const double> q_nodes) {
    if (p_weights.size() != p_nodes.size() || q_weights.size() != q_nodes.size())
        throw std::invalid_argument("w1_1d: weight/node size mismatch");
    check_normalized(p_weights, "w1_1d p");
    check_normalized(q_weights, "w1_1d q");

    // Sweep the merged node set, integrating |F_p - F_q| between consecutive
    // support points.
    std::size_t i = 0, j = 0;
    double Fp = 0.0, Fq = 0.0, last_x = 0.0, total = 0.0;
    bool started = false;
    while (i < p_nodes.size() || j < q_nodes.size()) {
        double x;
        if (j >= q_nodes.size() || (i < p_nodes.size() && p_nodes[i] <= q_nodes[j]))
            x = p_nodes[i];
        else
            x = q_nodes[j];
        if (started) total += std::abs(Fp - Fq) * (x - last_x);
        while (i < p_nodes.size() && p_nodes[i] <= x) Fp += p_weights[i++];
        while (j < q_nodes.size() && q_nodes[j] <= x) Fq += q_weights[j++];
        last_x = x;
        started = true;
    }
    return total;
}

double w1_1d_shared(std::span<const double> p_weights, std::span<const double> q_weights,
                    std::span<const double> nodes) {
    if (p_weights.size() != nodes.size() || q_weights.size() != nodes.size())
        throw std::invalid_argument("w1_1d_shared: size mismatch");
    double cum = 0.0, total = 0.0;
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
        cum += p_weights[k] - q_weights[k];
        total += std::abs(cum) * (nodes[k + 1] - nodes[k]);
    }
    return total;
}

KlResult kl(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw std::invalid_argument("kl: size mismatch");
    KlResult out;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        if (q[i] <= 0.0) {
            out.support_violation = true;
            out.value = std::numeric_limits<double>::infinity();
            return out;
        }
        out.value += p[i] * (std::log(p[i]) - std::log(q[i]));
    }
    out.value = std::max(0.0, out.value);
    return out;
}

double sym_kl(std::span<const double> p, std::span<const double> q) {
    return kl(p, q).value + kl(q, p).value;
}

double sym_kl_plans(const Plan2D& a, const Plan2D& b) {
    if (a.w.size() != b.w.size()) throw std::invalid_argument("sym_kl_plans: shape mismatch");
    // (p - q) log(p/q) summed cell-wise, using stored logs.
    double s = 0.0;
    for (std::size_t idx = 0; idx < a.w.size(); ++idx) {
        const double diff = a.w[idx] - b.w[idx];
        if (diff != 0.0) s += diff * (a.logw[idx] - b.logw[idx]);
    }
    return std::max(0.0, s);
}

double sym_entropy_from_potentials(std::span<const double> diff,
                                   std::span<const double> base_weights,
                                   std::span<const double> adjusted_weights) {
    if (diff.size() != base_weights.size() || diff.size() != adjusted_weights.size())
        throw std::invalid_argument("sym_entropy_from_potentials: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < diff.size(); ++i)
        s += diff[i] * (base_weights[i] - adjusted_weights[i]);
    return s;
}

double l1_phi_grad_error(const SinkhornProblem& p, std::span<const double> psi_iter,
                         const ReferenceSolution& ref) {
    const std::size_t nx = p.mu.grid.size();
    std::vector<double> gap(nx);
    parallel_for(nx, [&](std::size_t beg, std::size_t end) {
        for (std::size_t i = beg; i < end; ++i) {
            const auto mv = conditional_stats(p.mu.grid.nodes[i], psi_iter, p.nu.grid, p.T);
            gap[i] = std::abs(mv.mean - ref.cond_mean_psi[i]) / p.T;
        }
    });
    double s = 0.0;
    for (std::size_t i = 0; i < nx; ++i) s += p.mu.density_weights[i] * gap[i];
    return s;
}

double l1_psi_grad_error(const SinkhornProblem& p, std::span<const double> phi_iter,
                         const ReferenceSolution& ref) {
    return l1_psi_grad_error_weighted(p, phi_iter, ref, p.nu.density_weights);
}

double l1_psi_grad_error_weighted(const SinkhornProblem& p, std::span<const double> phi_iter,
                                  const ReferenceSolution& ref, std::span<const double> weights) {
    const std::size_t ny = p.nu.grid.size();
    if (weights.size() != ny) throw std::invalid_argument("l1_psi_grad_error: weight size mismatch");
    std::vector<double> gap(ny);
    parallel_for(ny, [&](std::size_t beg, std::size_t end) {
        for (std::size_t j = beg; j < end; ++j) {
            const auto mv = conditional_stats(p.nu.grid.nodes[j], phi_iter, p.mu.grid, p.T);
            gap[j] = std::abs(mv.mean - ref.cond_mean_phi[j]) / p.T;
        }
    });
    double s = 0.0;
    for (std::size_t j = 0; j < ny; ++j) s += weights[j] * gap[j];
    return s;
}

double pointwise_ratio_max(const SinkhornProblem& p, std::span<const double> phi_iter,
                           const ReferenceSolution& ref, double A, double B) {
    const std::size_t ny = p.nu.grid.size();
    std::vector<double> ratio(ny);
    parallel_for(ny, [&](std::size_t beg, std::size_t end) {
        for (std::size_t j = beg; j < end; ++j) {
            const double y = p.nu.grid.nodes[j];
            const auto mv = conditional_stats(y, phi_iter, p.mu.grid, p.T);
            const double gap = std::abs(mv.mean - ref.cond_mean_phi[j]) / p.T;
            ratio[j] = gap / (A * std::abs(y) + B);
        }
    });
    return *std::max_element(ratio.begin(), ratio.end());
}

double w1_plan_bound_nn(const SinkhornProblem& p, std::span<const double> phi_iter,
                        const ReferenceSolution& ref) {
    const std::size_t ny = p.nu.grid.size(), nx = p.mu.grid.size();
    std::vector<double> dist(ny);
    parallel_for(ny, [&](std::size_t beg, std::size_t end) {
        for (std::size_t j = beg; j < end; ++j) {
            const auto row = conditional_measure(p.nu.grid.nodes[j], phi_iter, p.mu.grid, p.T);
            dist[j] = w1_1d_shared(row, std::span<const double>(&ref.cond_rows_phi[j * nx], nx),
                                   p.mu.grid.nodes);
        }
    });
    double s = 0.0;
    for (std::size_t j = 0; j < ny; ++j) s += p.nu.density_weights[j] * dist[j];
    return s;
}

double w1_plan_bound_n1n(const SinkhornProblem& p, std::span<const double> psi_iter,
                         const ReferenceSolution& ref) {
    const std::size_t nx = p.mu.grid.size(), ny = p.nu.grid.size();
    std::vector<double> dist(nx);
    parallel_for(nx, [&](std::size_t beg, std::size_t end) {
        for (std::size_t i = beg; i < end; ++i) {
            const auto row = conditional_measure(p.mu.grid.nodes[i], psi_iter, p.nu.grid, p.T);
            dist[i] = w1_1d_shared(row, std::span<const double>(&ref.cond_rows_psi[i * ny], ny),
                                   p.nu.grid.nodes);
        }
    });
    double s = 0.0;
    for (std::size_t i = 0; i < nx; ++i) s += p.mu.density_weights[i] * dist[i];
    return s;
}

RateFit fit_rate(std::span<const double> errors) {
    std::vector<double> logs;
    logs.reserve(errors.size());
    for (double e : errors)
        if (e > 0.0) logs.push_back(std::log(e));
    if (logs.size() < 3) throw std::invalid_argument("fit_rate: need >= 3 positive entries");
    const std::size_t start = logs.size() / 2;
    const std::size_t m = logs.size() - start;
    // Least squares of logs[start..] against 0..m-1.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        sx += k;
        sy += logs[start + k];
        sxx += static_cast<double>(k) * k;
        sxy += k * logs[start + k];
    }
    RateFit fit;
    const double denom = m * sxx - sx * sx;
    fit.log_slope = denom != 0.0 ? (m * sxy - sx * sy) / denom : 0.0;
    fit.ratio = std::exp(fit.log_slope);
    return fit;
}

}  // namespace eotlab
