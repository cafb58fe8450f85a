#include "eotlab/profiles.hpp"

#include <cmath>
#include <stdexcept>

namespace eotlab {

double ProfileFunction::value(double r) const {
    switch (kind_) {
        case ProfileKind::Zero:
            return 0.0;
        case ProfileKind::Tanh: {
            const double s = std::sqrt(tanh_L_);
            return 2.0 * s * std::tanh(0.5 * r * s);
        }
        case ProfileKind::Tabulated:
            return table_.value(r);
    }
    return 0.0;
}

double ProfileFunction::deriv(double r) const {
    switch (kind_) {
        case ProfileKind::Zero:
            return 0.0;
        case ProfileKind::Tanh: {
            const double s = std::sqrt(tanh_L_);
            const double c = std::cosh(0.5 * r * s);
            return tanh_L_ / (c * c);
        }
        case ProfileKind::Tabulated:
            return table_.deriv(r);
    }
    return 0.0;
}

ProfileFunction ProfileFunction::zero() { return ProfileFunction{}; }

ProfileFunction ProfileFunction::tanh_family(double L) {
    if (!(L > 0.0)) throw std::domain_error("tanh_profile: L must be positive");
    ProfileFunction g;
    g.kind_ = ProfileKind::Tanh;
    g.tanh_L_ = L;
    g.sup_norm_ = 2.0 * std::sqrt(L);
    g.slope0_ = L;
    g.flags_ = {true, true, true};
    return g;
}

ProfileFunction ProfileFunction::tabulated(std::vector<double> radii, std::vector<double> values,
                                           ProfileClassFlags claims) {
    if (radii.size() != values.size() || radii.size() < 2)
        throw std::invalid_argument("tabulated profile: need >= 2 matched samples");
    if (!(radii.front() > 0.0)) throw std::invalid_argument("tabulated profile: radii must be positive");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (i > 0 && !(radii[i] > radii[i - 1]))
            throw std::invalid_argument("tabulated profile: radii must be strictly increasing");
        if (values[i] < 0.0) throw std::invalid_argument("tabulated profile: negative ordinate");
    }
    ProfileFunction g;
    g.kind_ = ProfileKind::Tabulated;
    g.sup_norm_ = *std::max_element(values.begin(), values.end());
    // Left-end slope, extrapolated toward the origin from the first segment.
    g.slope0_ = values.front() > 0.0 && claims.full
                    ? values[0] / radii[0]
                    : (values[1] - values[0]) / (radii[1] - radii[0]);
    if (claims.full) g.slope0_ = std::max(g.slope0_, values[0] / radii[0]);
    g.table_ = Pchip(std::move(radii), std::move(values));
    g.flags_ = claims;
    return g;
}

ProfileFunction tanh_profile(double L) { return ProfileFunction::tanh_family(L); }

double solve_L(double R, double C_U, double tol) {
    if (!(R > 0.0) || !(C_U > 0.0)) throw std::domain_error("solve_L: R and C_U must be positive");
    auto slope_at_R = [R](double L) {
        const double s = std::sqrt(L);
        return 2.0 * s * std::tanh(0.5 * R * s) / R;
    };
    double hi = 1.0;
    while (slope_at_R(hi) < C_U) hi *= 2.0;
    return bisect_increasing(slope_at_R, 0.0, hi, C_U, tol);
}

namespace {

constexpr double kCheckTol = 1e-6;

void check_cond(bool ok, const char* what, ClassCheckResult& out) {
    if (!ok) {
        out.pass = false;
        out.violations.emplace_back(what);
    }
}

}  // namespace

ClassCheckResult class_membership_check(const ProfileFunction& g, ProfileClass cls,
                                        std::span<const double> grid) {
    if (grid.empty()) throw std::invalid_argument("class_membership_check: empty grid");
    ClassCheckResult out;

    bool nonneg = true, transform_monotone = true, transform_concave = true;
    bool origin_vanishes = true, deriv_nonneg = true, diff_ineq = true, origin_limit = true;
    for (double r : grid) {
        if (!(r > 0.0)) continue;
        const double h = 1e-4 * std::max(1.0, r);
        const double hr = std::min(h, 0.5 * r);

        if (g.value(r) < -kCheckTol) nonneg = false;

        // Conditions on t -> sqrt(t) g(sqrt(t)) at t = r^2.
        const double t = r * r;
        const double ht = std::min(1e-4 * std::max(1.0, t), 0.5 * t);
        auto trans = [&g](double u) { return std::sqrt(u) * g.value(std::sqrt(u)); };
        const double first = (trans(t + ht) - trans(t - ht)) / (2.0 * ht);
        const double second = (trans(t + ht) - 2.0 * trans(t) + trans(t - ht)) / (ht * ht);
        if (first < -kCheckTol) transform_monotone = false;
        if (second > kCheckTol) transform_concave = false;

        const double gp = (g.value(r + hr) - g.value(r - hr)) / (2.0 * hr);
        const double gpp = (g.value(r + hr) - 2.0 * g.value(r) + g.value(r - hr)) / (hr * hr);
        if (gp < -kCheckTol) deriv_nonneg = false;
        if (2.0 * gpp + g.value(r) * gp > kCheckTol) diff_ineq = false;
    }
    // r*g(r) must vanish toward the origin; probe the evaluator near zero.
    const double r_tiny = 1e-8;
    if (std::abs(r_tiny * g.value(r_tiny)) > kCheckTol) origin_limit = false;
    const double r0 = grid.front();
    if (r0 > 0.0 && g.value(r0) > g.slope_at_zero() * r0 + kCheckTol &&
        g.value(r0) > kCheckTol)
        origin_vanishes = false;

    check_cond(nonneg, "g >= 0", out);
    check_cond(transform_monotone, "sqrt-transform non-decreasing", out);
    check_cond(transform_concave, "sqrt-transform concave", out);
    check_cond(origin_limit, "r*g(r) -> 0 at the origin", out);
    if (cls == ProfileClass::Bounded || cls == ProfileClass::Full) {
        check_cond(std::isfinite(g.sup_norm()), "bounded", out);
        check_cond(diff_ineq, "2g'' + g g' <= 0", out);
    }
    if (cls == ProfileClass::Full) {
        check_cond(origin_vanishes, "g(0+) = 0", out);
        check_cond(deriv_nonneg, "g' >= 0", out);
    }
    return out;
}

ConvexityProfileEstimate estimate_kappa(const std::function<double(double)>& U_prime,
                                        std::span<const double> radii,
                                        std::span<const double> sample_points) {
    if (sample_points.empty()) throw std::invalid_argument("estimate_kappa: empty sample set");
    ConvexityProfileEstimate est;
    est.radii.assign(radii.begin(), radii.end());
    est.kappa_values.reserve(radii.size());
    est.ell_values.reserve(radii.size());
    for (double r : radii) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (double x : sample_points) {
            const double q = (U_prime(x + r) - U_prime(x)) / r;
            lo = std::min(lo, q);
            hi = std::max(hi, q);
        }
        est.kappa_values.push_back(lo);
        est.ell_values.push_back(hi);
    }
    return est;
}

bool verify_alc(const std::function<double(double)>& U_prime, double alpha,
                const ProfileFunction& g_tilde, std::span<const double> radii,
                std::span<const double> sample_points, double tol) {
    const auto est = estimate_kappa(U_prime, radii, sample_points);
    for (std::size_t i = 0; i < est.radii.size(); ++i) {
        const double r = est.radii[i];
        if (est.kappa_values[i] < alpha - g_tilde.value(r) / r - tol) return false;
    }
    return true;
}

}  // namespace eotlab
