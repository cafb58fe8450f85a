#include <doctest.h>

#include <cmath>

#include "eotlab/profiles.hpp"

using namespace eotlab;

namespace {

std::vector<double> default_radii() {
    std::vector<double> r;
    for (double v = 0.05; v <= 8.0; v += 0.05) r.push_back(v);
    return r;
}

}  // namespace

TEST_CASE("tanh profile values, norms and slope") {
    const auto g4 = tanh_profile(4.0);
    CHECK(g4.value(0.0) == doctest::Approx(0.0));
    CHECK(g4.sup_norm() == doctest::Approx(4.0));
    CHECK(g4.slope_at_zero() == doctest::Approx(4.0));

    const auto g1 = tanh_profile(1.0);
    CHECK(g1.value(2.0) == doctest::Approx(2.0 * std::tanh(1.0)).epsilon(1e-14));
    CHECK(g1.value(2.0) == doctest::Approx(1.52318).epsilon(1e-5));

    CHECK_THROWS_AS(tanh_profile(0.0), std::domain_error);
    CHECK_THROWS_AS(tanh_profile(-1.0), std::domain_error);
}

TEST_CASE("tanh profile satisfies the differential identity exactly") {
    // 2 g'' + g g' vanishes for the family; g'' is differenced from the
    // analytic first derivative to stay clear of second-difference roundoff.
    for (double L : {0.5, 1.0, 4.0}) {
        const auto g = tanh_profile(L);
        for (double r = 0.2; r < 6.0; r += 0.4) {
            const double h = 1e-6;
            const double gpp = (g.deriv(r + h) - g.deriv(r - h)) / (2 * h);
            CHECK(std::abs(2 * gpp + g.value(r) * g.deriv(r)) < 1e-8 * std::max(1.0, L * L));
        }
    }
}

TEST_CASE("sublinearity of vanishing-origin profiles") {
    for (double L : {0.3, 1.0, 2.5}) {
        const auto g = tanh_profile(L);
        for (double r = 0.01; r < 10.0; r += 0.13)
            CHECK(g.value(r) <= g.slope_at_zero() * r + 1e-12);
    }
}

TEST_CASE("solve_L matches an independent root and the saturation regime") {
    // g_L(2)/2 = sqrt(L) tanh(sqrt(L)) = 1; solve for u = sqrt(L) independently.
    double lo = 0.5, hi = 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (mid * std::tanh(mid) >= 1.0 ? hi : lo) = mid;
    }
    const double L_expected = hi * hi;
    CHECK(solve_L(2.0, 1.0) == doctest::Approx(L_expected).epsilon(1e-9));
    CHECK(solve_L(2.0, 1.0) == doctest::Approx(1.4392).epsilon(1e-4));

    // Wide radius: tanh saturates and L approaches (C_U R / 2)^2.
    CHECK(solve_L(100.0, 0.04) == doctest::Approx(4.0).epsilon(0.01));

    // Tiny required slope gives a tiny parameter.
    CHECK(solve_L(1.0, 1e-8) < 1e-6);

    CHECK_THROWS_AS(solve_L(-1.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(solve_L(1.0, 0.0), std::domain_error);
}

TEST_CASE("class membership: zero, tanh and a quadratic table") {
    const auto radii = default_radii();

    const auto zero = ProfileFunction::zero();
    for (auto cls : {ProfileClass::Base, ProfileClass::Bounded, ProfileClass::Full})
        CHECK(class_membership_check(zero, cls, radii).pass);

    CHECK(class_membership_check(tanh_profile(1.0), ProfileClass::Full, radii).pass);
    CHECK(class_membership_check(tanh_profile(4.0), ProfileClass::Full, radii).pass);

    // g(r) = r^2, tabulated: vanishes at the origin but violates the
    // differential inequality (and is unbounded on its claimed class).
    std::vector<double> rs, gs;
    for (double r = 0.01; r <= 9.0; r += 0.01) {
        rs.push_back(r);
        gs.push_back(r * r);
    }
    ProfileClassFlags claims;
    claims.full = claims.bounded = true;
    const auto quad = ProfileFunction::tabulated(rs, gs, claims);
    const auto res = class_membership_check(quad, ProfileClass::Full, radii);
    CHECK_FALSE(res.pass);
    bool diff_ineq_flagged = false;
    for (const auto& v : res.violations)
        if (v.find("2g''") != std::string::npos) diff_ineq_flagged = true;
    CHECK(diff_ineq_flagged);

    CHECK_THROWS_AS(class_membership_check(zero, ProfileClass::Full, std::vector<double>{}),
                    std::invalid_argument);
}

TEST_CASE("tabulated profile validation") {
    CHECK_THROWS_AS(ProfileFunction::tabulated({1.0, 0.5}, {0.0, 1.0}, {}),
                    std::invalid_argument);  // not increasing
    CHECK_THROWS_AS(ProfileFunction::tabulated({0.5, 1.0}, {0.0, -1.0}, {}),
                    std::invalid_argument);  // negative ordinate
}

TEST_CASE("estimate_kappa on quadratic, perturbed and quartic potentials") {
    std::vector<double> samples;
    for (double x = -6.0; x <= 6.0; x += 0.05) samples.push_back(x);
    const std::vector<double> radii = {0.1, 0.5, 1.0, 2.0, 4.0};

    SUBCASE("quadratic potential gives the curvature exactly") {
        for (double a : {0.5, 1.0, 3.0}) {
            auto U1 = [a](double x) { return a * x; };
            const auto est = estimate_kappa(U1, radii, samples);
            for (std::size_t i = 0; i < radii.size(); ++i) {
                CHECK(est.kappa_values[i] == doctest::Approx(a).epsilon(1e-14));
                CHECK(est.ell_values[i] == doctest::Approx(a).epsilon(1e-14));
            }
        }
    }

    SUBCASE("cosine perturbation stays above the Lipschitz envelope") {
        auto U1 = [](double x) { return x - 0.2 * std::sin(2.0 * x); };
        const auto est = estimate_kappa(U1, radii, samples);
        for (std::size_t i = 0; i < radii.size(); ++i) {
            const double r = radii[i];
            CHECK(est.kappa_values[i] >= 1.0 - 0.4 * std::min(1.0, 2.0 / r) - 1e-12);
            CHECK(est.ell_values[i] >= est.kappa_values[i]);
        }
    }

    SUBCASE("quartic potential loses convexity near the origin") {
        auto U1 = [](double x) { return x * x * x; };
        const auto est = estimate_kappa(U1, std::vector<double>{0.01, 0.1, 1.0}, samples);
        CHECK(est.kappa_values[0] <= 1e-3);  // behaves like r^2 at the flat point
        CHECK(est.kappa_values[1] <= 1e-1);
    }

    CHECK_THROWS_AS(estimate_kappa([](double x) { return x; }, radii, std::vector<double>{}),
                    std::invalid_argument);
}

TEST_CASE("verify_alc on Gaussian and perturbed potentials") {
    std::vector<double> samples;
    for (double x = -6.0; x <= 6.0; x += 0.05) samples.push_back(x);
    const auto radii = default_radii();

    auto gauss = [](double x) { return x; };
    CHECK(verify_alc(gauss, 1.0, ProfileFunction::zero(), radii, samples));
    CHECK_FALSE(verify_alc(gauss, 2.0, ProfileFunction::zero(), radii, samples));

    // Perturbed potential with the solved tanh cover: C_U = a*omega^2 = 0.4.
    auto perturbed = [](double x) { return x - 0.2 * std::sin(2.0 * x); };
    const auto cover = tanh_profile(solve_L(1.0, 0.4));
    CHECK(verify_alc(perturbed, 1.0, cover, radii, samples));
}
