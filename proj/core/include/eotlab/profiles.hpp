#pragma once

#include <functional>
#include <string>
#include <vector>

#include "eotlab/numerics.hpp"

namespace eotlab {

enum class ProfileKind { Zero, Tanh, Tabulated };

// Which concavity-perturbation class a profile is claimed to belong to.
// Full: bounded, vanishing at the origin, non-decreasing, 2g'' + g g' <= 0.
// Bounded: bounded with 2g'' + g g' <= 0 (a non-null origin value is allowed).
// Base: only the square-root transform monotonicity/concavity requirements.
enum class ProfileClass { Base, Bounded, Full };

struct ProfileClassFlags {
    bool base = true;
    bool bounded = false;
    bool full = false;
};

// A radial perturbation profile r -> g(r), r > 0, with an analytic or
// tabulated evaluator and its derivative.
class ProfileFunction {
  public:
    ProfileFunction() = default;  // the zero profile

    ProfileKind kind() const { return kind_; }
    bool is_zero() const { return kind_ == ProfileKind::Zero; }
    double tanh_parameter() const { return tanh_L_; }

    double value(double r) const;
    double deriv(double r) const;
    double sup_norm() const { return sup_norm_; }
    double slope_at_zero() const { return slope0_; }
    ProfileClassFlags class_flags() const { return flags_; }

    static ProfileFunction zero();
    static ProfileFunction tanh_family(double L);
    static ProfileFunction tabulated(std::vector<double> radii, std::vector<double> values,
                                     ProfileClassFlags claims);

  private:
    ProfileKind kind_ = ProfileKind::Zero;
    double tanh_L_ = 0.0;
    Pchip table_;
    double sup_norm_ = 0.0;
    double slope0_ = 0.0;
    ProfileClassFlags flags_{true, true, true};
};

// The tanh family member with parameter L > 0: value 2*sqrt(L)*tanh(r*sqrt(L)/2).
ProfileFunction tanh_profile(double L);

// Smallest L such that g_L(R)/R >= C_U, by bisection on the increasing map
// L -> g_L(R)/R.
double solve_L(double R, double C_U, double tol = 1e-12);

struct ClassCheckResult {
    bool pass = true;
    std::vector<std::string> violations;
};

// Samples the defining conditions of `cls` on `grid` via central finite
// differences (step 1e-4 * max(1, r), tolerance 1e-6 on inequality slack).
ClassCheckResult class_membership_check(const ProfileFunction& g, ProfileClass cls,
                                        std::span<const double> grid);

struct ConvexityProfileEstimate {
    std::vector<double> radii;
    std::vector<double> kappa_values;  // sampled infima of the gradient increment quotient
    std::vector<double> ell_values;    // sampled suprema of the same quotient
};

// One-sided sampled estimates of the integrated convexity/concavity profiles of
// a potential with derivative `U_prime`, in dimension one:
//   kappa_hat(r) = min_x (U'(x+r) - U'(x)) / r over x in sample_points.
// The sampled min upper-bounds the true infimum.
ConvexityProfileEstimate estimate_kappa(const std::function<double(double)>& U_prime,
                                        std::span<const double> radii,
                                        std::span<const double> sample_points);

// Sampled test of the asymptotic log-concavity bound
// kappa_hat(r) >= alpha - g_tilde(r)/r on all radii. A pass means the bound is
// not falsified on the sample, not that it holds everywhere.
bool verify_alc(const std::function<double(double)>& U_prime, double alpha,
                const ProfileFunction& g_tilde, std::span<const double> radii,
                std::span<const double> sample_points, double tol = 1e-9);

}  // namespace eotlab
