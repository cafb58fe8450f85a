#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace eotlab {

// log(sum_i exp(v_i)) with a running-max shift; -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> v);

// Two-pass functor form: term(i) returns the i-th log-summand.
template <class F>
double log_sum_exp_terms(std::size_t n, F&& term) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, term(i));
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::exp(term(i) - m);
    return m + std::log(s);
}

struct MeanVar {
    double mean = 0.0;
    double var = 0.0;
    double log_norm = 0.0;  // log of the unnormalized mass
};

// Monotone cubic (Fritsch-Carlson) interpolant on strictly increasing abscissae.
// Evaluation clamps to the boundary values outside the table.
class Pchip {
  public:
    Pchip() = default;
    Pchip(std::vector<double> x, std::vector<double> y);

    double value(double x) const;
    double deriv(double x) const;
    bool empty() const { return x_.empty(); }
    const std::vector<double>& abscissae() const { return x_; }
    const std::vector<double>& ordinates() const { return y_; }

  private:
    std::size_t segment(double x) const;
    std::vector<double> x_, y_, d_;
};

// Smallest s in [lo, hi] with f(s) >= target, for f non-decreasing with
// f(lo) < target <= f(hi). Relative tolerance on s.
double bisect_increasing(const std::function<double(double)>& f, double lo, double hi,
                         double target, double rel_tol);

// Golden-section minimizer of a unimodal f on [a, b]; +inf values are allowed
// and treated as worse than any finite value.
double golden_min(const std::function<double(double)>& f, double a, double b, double tol);

// Standard normal upper tail P(Z > z) and its inverse.
double normal_upper_tail(double z);
double normal_tail_quantile(double p);

// Cumulative trapezoid of samples y on abscissae x; out[0] = 0.
std::vector<double> cum_trapezoid(std::span<const double> x, std::span<const double> y);

// Index-range parallelism. Each chunk [begin, end) is processed by one worker;
// workers never share output slots, so results are deterministic.
int thread_budget();
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& chunk);

}  // namespace eotlab
