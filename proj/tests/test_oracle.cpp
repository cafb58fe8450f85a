#include <doctest.h>

#include <cmath>

#include "eotlab/oracle.hpp"

using namespace eotlab;

TEST_CASE("unit Gaussians at T = 2: closed-form coefficients") {
    const auto sol = solve_gaussian(0.0, 1.0, 0.0, 1.0, 2.0);
    // Quadratic coefficient solves T a^2 + (2 - T) a - 1 = 0.
    CHECK(sol.a_phi == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK(sol.a_psi == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    CHECK(sol.b_phi == doctest::Approx(0.0));
    CHECK(sol.b_psi == doctest::Approx(0.0));
    CHECK(sol.c_phi == doctest::Approx(sol.c_psi).epsilon(1e-12));
    CHECK(sol.cross_cov == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-12));
    CHECK(sol.cross_cov == doctest::Approx(std::sqrt(1.0 + 4.0 / 4.0) - 1.0).epsilon(1e-12));
    CHECK(sol.residual < 1e-12);

    // Plan marginals reproduce the inputs.
    CHECK(sol.plan_var_x() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(sol.plan_var_y() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(sol.plan_mean_x() == doctest::Approx(0.0));
    CHECK(sol.plan_mean_y() == doctest::Approx(0.0));
}

TEST_CASE("asymmetric means and variances still close the fixed point") {
    const auto sol = solve_gaussian(1.0, 0.7, -0.5, 2.3, 1.5);
    CHECK(sol.residual < 1e-12);
    CHECK(sol.plan_mean_x() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(sol.plan_mean_y() == doctest::Approx(-0.5).epsilon(1e-10));
    CHECK(sol.plan_var_x() == doctest::Approx(0.7).epsilon(1e-10));
    CHECK(sol.plan_var_y() == doctest::Approx(2.3).epsilon(1e-10));
    CHECK(oracle_profile_check(sol));
}

TEST_CASE("quadratic coefficients saturate the convexity-floor limits") {
    SUBCASE("unit case at T = 2") {
        const auto sol = solve_gaussian(0.0, 1.0, 0.0, 1.0, 2.0);
        CHECK(oracle_profile_check(sol));
        CHECK(sol.a_psi ==
              doctest::Approx(strongly_logconcave_limit(1.0, 1.0, 2.0)).epsilon(1e-12));
    }
    SUBCASE("wide marginals at large T") {
        const auto sol = solve_gaussian(0.0, 4.0, 0.0, 4.0, 8.0);
        CHECK(oracle_profile_check(sol));
        CHECK(sol.a_psi ==
              doctest::Approx(strongly_logconcave_limit(0.25, 0.25, 8.0)).epsilon(1e-12));
        CHECK(sol.a_psi == doctest::Approx(std::sqrt(1.0 / 32.0)).epsilon(1e-12));
    }
    SUBCASE("the limit with an infinite ceiling strictly undercuts the coefficient") {
        const auto sol = solve_gaussian(0.0, 1.0, 0.0, 1.0, 2.0);
        const double open_end = strongly_logconcave_limit(1.0,
                                                          std::numeric_limits<double>::infinity(),
                                                          2.0);
        CHECK(sol.a_psi > open_end);
    }
}

TEST_CASE("large regularization decouples the plan") {
    const auto sol = solve_gaussian(0.0, 1.0, 0.0, 1.0, 1e6);
    CHECK(std::abs(sol.cross_cov) < 1e-5);
    CHECK(sol.plan_var_x() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("symmetric zero-mean inputs give matching sides") {
    const auto sol = solve_gaussian(0.0, 1.7, 0.0, 1.7, 2.5);
    CHECK(sol.a_phi == doctest::Approx(sol.a_psi).epsilon(1e-13));
    CHECK(sol.b_phi == doctest::Approx(0.0));
    CHECK(sol.b_psi == doctest::Approx(0.0));
}

TEST_CASE("invalid inputs are rejected") {
    CHECK_THROWS_AS(solve_gaussian(0.0, -1.0, 0.0, 1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(solve_gaussian(0.0, 1.0, 0.0, 1.0, 0.0), std::domain_error);
}
