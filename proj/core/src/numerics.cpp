#include "eotlab/numerics.hpp"

#include <cstdlib>
#include <stdexcept>
#include <thread>

namespace eotlab {

double log_sum_exp(std::span<const double> v) {
    return log_sum_exp_terms(v.size(), [&](std::size_t i) { return v[i]; });
}

Pchip::Pchip(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw std::invalid_argument("Pchip: need >= 2 matched points");
    for (std::size_t i = 1; i < n; ++i)
        if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("Pchip: abscissae not increasing");

    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x_[i + 1] - x_[i];
        delta[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    d_.assign(n, 0.0);
    // Fritsch-Carlson slopes: weighted harmonic mean where the data is monotone,
    // zero across local extrema.
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (delta[i - 1] * delta[i] > 0.0) {
            const double w1 = 2.0 * h[i] + h[i - 1];
            const double w2 = h[i] + 2.0 * h[i - 1];
            d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    auto end_slope = [](double d_edge, double delta0, double delta1, double h0, double h1) {
        double d = ((2.0 * h0 + h1) * delta0 - h0 * delta1) / (h0 + h1);
        if (d * delta0 <= 0.0)
            d = 0.0;
        else if (delta0 * delta1 <= 0.0 && std::abs(d) > 3.0 * std::abs(delta0))
            d = 3.0 * delta0;
        (void)d_edge;
        return d;
    };
    if (n == 2) {
        d_[0] = d_[1] = delta[0];
    } else {
        d_[0] = end_slope(d_[0], delta[0], delta[1], h[0], h[1]);
        d_[n - 1] = end_slope(d_[n - 1], delta[n - 2], delta[n - 3], h[n - 2], h[n - 3]);
    }
}

std::size_t Pchip::segment(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    if (it == x_.begin()) return 0;
    std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(i, x_.size() - 2);
}

double Pchip::value(double x) const {
    if (x <= x_.front()) return y_.front();
    if (x >= x_.back()) return y_.back();
    const std::size_t i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
    const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
    return h00 * y_[i] + h * h10 * d_[i] + h01 * y_[i + 1] + h * h11 * d_[i + 1];
}

double Pchip::deriv(double x) const {
    if (x <= x_.front()) return d_.front();
    if (x >= x_.back()) return d_.back();
    const std::size_t i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t;
    const double dh00 = (6 * t2 - 6 * t) / h, dh10 = 3 * t2 - 4 * t + 1;
    const double dh01 = (-6 * t2 + 6 * t) / h, dh11 = 3 * t2 - 2 * t;
    return dh00 * y_[i] + dh10 * d_[i] + dh01 * y_[i + 1] + dh11 * d_[i + 1];
}

double bisect_increasing(const std::function<double(double)>& f, double lo, double hi,
                         double target, double rel_tol) {
    if (!(hi > lo)) throw std::invalid_argument("bisect_increasing: bad bracket");
    if (f(hi) < target) throw std::invalid_argument("bisect_increasing: target not reached at hi");
    for (int it = 0; it < 200 && (hi - lo) > rel_tol * std::max(1.0, std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) >= target)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

double golden_min(const std::function<double(double)>& f, double a, double b, double tol) {
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol * std::max(1.0, std::abs(a) + std::abs(b))) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
    }
    return f1 <= f2 ? x1 : x2;
}

double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double normal_tail_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_tail_quantile: p outside (0,1)");
    // Asymptotic start, then Newton on the tail function.
    double z = p < 0.5 ? std::sqrt(std::max(0.0, -2.0 * std::log(2.0 * p))) : 0.0;
    for (int it = 0; it < 60; ++it) {
        const double fz = normal_upper_tail(z) - p;
        const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
        if (pdf <= 0.0) break;
        const double step = fz / pdf;
        z += step;
        if (std::abs(step) < 1e-14 * std::max(1.0, std::abs(z))) break;
    }
    return z;
}

std::vector<double> cum_trapezoid(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("cum_trapezoid: size mismatch");
    std::vector<double> out(x.size(), 0.0);
    for (std::size_t i = 1; i < x.size(); ++i)
        out[i] = out[i - 1] + 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
    return out;
}

int thread_budget() {
    static const int budget = [] {
        int hw = static_cast<int>(std::thread::hardware_concurrency());
        if (hw <= 0) hw = 1;
        if (const char* env = std::getenv("EOTLAB_THREADS")) {
            const int cap = std::atoi(env);
            if (cap >= 1) hw = std::min(hw, cap);
        }
        return hw;
    }();
    return budget;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& chunk) {
    const int nt = thread_budget();
    if (nt <= 1 || n < 2048) {
        chunk(0, n);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(nt), n);
    const std::size_t per = (n + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * per;
        const std::size_t end = std::min(n, begin + per);
        if (begin >= end) break;
        pool.emplace_back([&chunk, begin, end] { chunk(begin, end); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace eotlab
