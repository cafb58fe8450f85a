#include <doctest.h>

#include <cmath>

#include "eotlab/numerics.hpp"

using namespace eotlab;

TEST_CASE("log_sum_exp matches direct summation and survives large shifts") {
    std::vector<double> v = {0.0, 1.0, -2.0};
    const double direct = std::log(std::exp(0.0) + std::exp(1.0) + std::exp(-2.0));
    CHECK(log_sum_exp(v) == doctest::Approx(direct).epsilon(1e-14));

    std::vector<double> big = {1000.0, 1000.0};
    CHECK(log_sum_exp(big) == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-14));

    std::vector<double> empty;
    CHECK(std::isinf(log_sum_exp(empty)));
}

TEST_CASE("pchip preserves monotone data and reproduces smooth functions") {
    std::vector<double> x, y;
    for (int i = 0; i <= 50; ++i) {
        x.push_back(0.1 * i);
        y.push_back(std::tanh(x.back()));
    }
    Pchip p(x, y);
    for (double t = 0.05; t < 4.9; t += 0.17) {
        CHECK(std::abs(p.value(t) - std::tanh(t)) < 5e-4);
        CHECK(std::abs(p.deriv(t) - 1.0 / std::pow(std::cosh(t), 2)) < 5e-3);
    }
    // No overshoot between monotone samples.
    for (double t = 0.0; t < 4.99; t += 0.01) CHECK(p.value(t + 0.01) >= p.value(t) - 1e-12);
}

TEST_CASE("bisect_increasing finds the smallest crossing") {
    auto f = [](double s) { return 2.0 * s; };
    CHECK(bisect_increasing(f, 0.0, 10.0, 2.0, 1e-13) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("golden_min locates a quadratic minimum") {
    auto f = [](double t) { return (t - 1.3) * (t - 1.3) + 0.5; };
    CHECK(golden_min(f, -4.0, 6.0, 1e-12) == doctest::Approx(1.3).epsilon(1e-8));
}

TEST_CASE("normal tail quantile inverts the tail function") {
    for (double p : {0.25, 1e-3, 1e-6, 5e-13}) {
        const double z = normal_tail_quantile(p);
        CHECK(normal_upper_tail(z) == doctest::Approx(p).epsilon(1e-10));
    }
    CHECK(normal_tail_quantile(5e-13) == doctest::Approx(7.15).epsilon(0.01));
}

TEST_CASE("cum_trapezoid integrates a line exactly") {
    std::vector<double> x = {0.0, 1.0, 3.0};
    std::vector<double> y = {0.0, 2.0, 6.0};
    const auto c = cum_trapezoid(x, y);
    CHECK(c[0] == 0.0);
    CHECK(c[1] == doctest::Approx(1.0));
    CHECK(c[2] == doctest::Approx(9.0));
}

TEST_CASE("parallel_for covers every index exactly once") {
    std::vector<int> hits(10000, 0);
    parallel_for(hits.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) hits[i] += 1;
    });
    for (int h : hits) CHECK(h == 1);
}
