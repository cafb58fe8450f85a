#include "eotlab/rates.hpp"

#include <cmath>
#include <stdexcept>

namespace eotlab {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

RateParams rate_params_from(const Marginal1D& mu, const Marginal1D& nu, double T) {
    if (!(T > 0.0)) throw std::domain_error("rate_params_from: T must be positive");
    RateParams p;
    p.alpha_mu = mu.alpha;
    p.alpha_nu = nu.alpha;
    p.beta_mu = mu.beta;
    p.beta_nu = nu.beta;
    p.gt_mu = mu.g_tilde;
    p.gt_nu = nu.g_tilde;
    p.g_mu = mu.g_small;
    p.g_nu = nu.g_small;
    p.T = T;
    return p;
}

double concavity_envelope(double beta, const ProfileFunction& g, const ProfileFunction& ghat,
                          double alpha, double T, double s) {
    if (!(alpha > -1.0 / T)) throw std::domain_error("concavity_envelope: alpha <= -1/T");
    if (s < 0.0) throw std::domain_error("concavity_envelope: negative s");
    if (s == 0.0) return 0.0;
    if (std::isinf(beta)) return kInf;
    const double r = std::sqrt(s);
    const double denom = 1.0 + T * alpha;
    return beta * s + s / (T * denom) + r * g.value(r) + r * ghat.value(r) / (denom * denom);
}

double envelope_inverse(double beta, const ProfileFunction& g, const ProfileFunction& ghat,
                        double alpha, double T, double u, double rel_tol) {
    if (!(alpha > -1.0 / T)) throw std::domain_error("envelope_inverse: alpha <= -1/T");
    if (!(u > 0.0)) throw std::domain_error("envelope_inverse: u must be positive");
    if (std::isinf(beta)) return 0.0;
    const double hi = u / beta;  // envelope >= beta*s reaches u there
    auto f = [&](double s) { return concavity_envelope(beta, g, ghat, alpha, T, s); };
    return bisect_increasing(f, 0.0, hi, u, rel_tol);
}

namespace {

// One step of the convexity-floor recursion for the given side.
double floor_step(const RateParams& p, Side side, double a) {
    if (side == Side::Nu)
        return p.alpha_nu - 1.0 / p.T +
               envelope_inverse(p.beta_mu, p.g_mu, p.gt_nu, a, p.T, 2.0) / (2.0 * p.T * p.T);
    return p.alpha_mu - 1.0 / p.T +
           envelope_inverse(p.beta_nu, p.g_nu, p.gt_mu, a, p.T, 2.0) / (2.0 * p.T * p.T);
}

}  // namespace

AlphaSchedule alpha_sequence(const RateParams& p, Side side, int n_terms, double fp_tol) {
    if (n_terms < 1) throw std::invalid_argument("alpha_sequence: n_terms must be >= 1");
    AlphaSchedule sched;
    sched.side = side;
    const double a0 = (side == Side::Nu ? p.alpha_nu : p.alpha_mu) - 1.0 / p.T;
    sched.values.reserve(n_terms);
    sched.values.push_back(a0);

    double a = a0;
    const double tight = std::max(1e-15, 1e-3 * fp_tol);
    const int cap = 10000;
    for (int n = 1; n <= cap; ++n) {
        const double next = floor_step(p, side, a);
        if (static_cast<int>(sched.values.size()) < n_terms) sched.values.push_back(next);
        const double delta = std::abs(next - a);
        a = next;
        if (delta <= tight && static_cast<int>(sched.values.size()) >= n_terms) break;
    }
    while (static_cast<int>(sched.values.size()) < n_terms) sched.values.push_back(a);
    sched.limit = a;
    sched.fixed_point_residual = std::abs(floor_step(p, side, a) - a);
    return sched;
}

double strongly_logconcave_limit(double alpha, double beta, double T) {
    if (std::isinf(beta)) return alpha - 1.0 / T;
    return 0.5 * (alpha + std::sqrt(alpha * alpha + 4.0 * alpha / (T * T * beta))) - 1.0 / T;
}

namespace {

// Contraction factor at convexity floor `a` for a profile g.
double gamma_at(const ProfileFunction& g, double a, double T) {
    const double theta = a + 1.0 / T;
    if (g.is_zero()) return 1.0 / theta;
    const double s0 = g.slope_at_zero();
    const double R = g.sup_norm() * (1.0 / s0 + 2.0 / theta);
    const double dR = g.deriv(R);
    return (s0 * s0) / (dR * dR * (theta + s0));
}

// Upper bound on every gamma_k of a side: the rate formula evaluated at the
// smallest possible convexity floor, i.e. with a_k + 1/T replaced by alpha.
double gamma_bound_at_alpha(const ProfileFunction& g, double alpha) {
    if (g.is_zero()) return 1.0 / alpha;
    const double s0 = g.slope_at_zero();
    const double R = g.sup_norm() * (1.0 / s0 + 2.0 / alpha);
    const double dR = g.deriv(R);
    return (s0 * s0) / (dR * dR * (alpha + s0));
}

// Simplified tanh-family display value: cosh^4 evaluated at the cutoff radius,
// not at the tanh argument. Reported for comparison only.
double gamma_tanh_display(const ProfileFunction& g, double a, double T) {
    const double theta = a + 1.0 / T;
    const double L = g.tanh_parameter();
    const double R = 2.0 * std::sqrt(L) * (1.0 / L + 2.0 / theta);
    const double c = std::cosh(R);
    return c * c * c * c / (theta + L);
}

}  // namespace

RateCertificate gamma_sequence(const RateParams& p, const AlphaSchedule& mu_sched,
                               const AlphaSchedule& nu_sched) {
    RateCertificate cert;
    cert.T = p.T;
    cert.alpha_phi_star = mu_sched.limit;
    cert.alpha_psi_star = nu_sched.limit;
    cert.gamma_mu.reserve(mu_sched.values.size());
    cert.gamma_nu.reserve(nu_sched.values.size());
    for (double a : mu_sched.values) cert.gamma_mu.push_back(gamma_at(p.gt_mu, a, p.T));
    for (double a : nu_sched.values) cert.gamma_nu.push_back(gamma_at(p.gt_nu, a, p.T));
    cert.gamma_inf_mu = gamma_at(p.gt_mu, mu_sched.limit, p.T);
    cert.gamma_inf_nu = gamma_at(p.gt_nu, nu_sched.limit, p.T);
    cert.product_rho = cert.gamma_inf_mu * cert.gamma_inf_nu / (p.T * p.T);
    cert.contraction_certified = cert.product_rho < 1.0;

    if (p.gt_mu.kind() == ProfileKind::Tanh)
        cert.tanh_display_gamma_inf_mu = gamma_tanh_display(p.gt_mu, mu_sched.limit, p.T);
    if (p.gt_nu.kind() == ProfileKind::Tanh)
        cert.tanh_display_gamma_inf_nu = gamma_tanh_display(p.gt_nu, nu_sched.limit, p.T);
    cert.tanh_display_discrepant =
        (p.gt_mu.kind() == ProfileKind::Tanh &&
         std::abs(cert.tanh_display_gamma_inf_mu - cert.gamma_inf_mu) >
             1e-9 * std::max(1.0, cert.gamma_inf_mu)) ||
        (p.gt_nu.kind() == ProfileKind::Tanh &&
         std::abs(cert.tanh_display_gamma_inf_nu - cert.gamma_inf_nu) >
             1e-9 * std::max(1.0, cert.gamma_inf_nu));
    return cert;
}

ThresholdResult sufficient_T(const RateParams& p) {
    ThresholdResult out;
    const bool zero_profiles = p.gt_mu.is_zero() && p.gt_nu.is_zero();
    if (zero_profiles && std::isinf(p.beta_mu) && std::isinf(p.beta_nu)) {
        out.threshold = 1.0 / std::sqrt(p.alpha_mu * p.alpha_nu);
        out.branch = "strongly-logconcave-beta-inf";
    } else if (zero_profiles) {
        // Reciprocal form keeps an infinite beta exact (1/beta = 0).
        const double rbm = std::isinf(p.beta_mu) ? 0.0 : 1.0 / p.beta_mu;
        const double rbn = std::isinf(p.beta_nu) ? 0.0 : 1.0 / p.beta_nu;
        const double num = 1.0 / (p.alpha_mu * p.alpha_nu) - rbm * rbn;
        const double den = std::sqrt((1.0 / p.alpha_mu + rbm) * (1.0 / p.alpha_nu + rbn));
        out.threshold = num / den;
        out.branch = "strongly-logconcave";
    } else {
        // Bound each side's limiting rate by its value at the smallest possible
        // convexity floor (alpha itself) and require T^2 above the product.
        const double bm = gamma_bound_at_alpha(p.gt_mu, p.alpha_mu);
        const double bn = gamma_bound_at_alpha(p.gt_nu, p.alpha_nu);
        out.threshold = std::sqrt(bm * bn);
        out.branch = "profile";
    }
    out.certified = p.T > out.threshold;
    return out;
}

LinearGrowth init_linear_growth(double alpha_phi_star, double T, double gt_mu_sup,
                                double grad_phi_star_at_0) {
    const double denom = T * alpha_phi_star + 1.0;
    if (!(denom > 0.0)) throw std::domain_error("init_linear_growth: T*alpha + 1 <= 0");
    LinearGrowth lg;
    lg.A = (T * alpha_phi_star + 2.0) / (T * denom);
    lg.B = (1.0 + gt_mu_sup + grad_phi_star_at_0) / denom;
    return lg;
}

void hat_gamma(RateCertificate& cert, const RateParams& p, double grad_phi_star_at_0,
               double grad_psi_star_at_0) {
    if (!(cert.B > 0.0)) throw std::domain_error("hat_gamma: B must be positive");
    const double T = p.T;
    auto bracket = [&](double a_star, double sup, double grad0) {
        const double first = 1.0 / (T * a_star + 1.0);
        const double second = 1.0 + (cert.A / cert.B) * (1.0 + sup + grad0) / (a_star + 1.0 / T);
        return std::max(first, second);
    };
    const double br_mu = bracket(cert.alpha_phi_star, p.gt_mu.sup_norm(), grad_phi_star_at_0);
    const double br_nu = bracket(cert.alpha_psi_star, p.gt_nu.sup_norm(), grad_psi_star_at_0);

    cert.hat_gamma_mu.clear();
    cert.hat_gamma_nu.clear();
    for (double g : cert.gamma_mu) cert.hat_gamma_mu.push_back(g * br_mu);
    for (double g : cert.gamma_nu) cert.hat_gamma_nu.push_back(g * br_nu);
    cert.hat_gamma_inf_mu = cert.gamma_inf_mu * br_mu;
    cert.hat_gamma_inf_nu = cert.gamma_inf_nu * br_nu;
    cert.pointwise_rho = cert.hat_gamma_inf_mu * cert.hat_gamma_inf_nu / (T * T);
    cert.pointwise_certified = cert.pointwise_rho < 1.0;

    // Independent large-T sufficient condition for the hat rates.
    const double cond_mu = cert.gamma_inf_mu +
                           cert.gamma_inf_mu * cert.A / (p.alpha_mu * cert.B) *
                               (1.0 + p.gt_mu.sup_norm() + grad_phi_star_at_0);
    const double cond_nu = cert.gamma_inf_nu +
                           cert.gamma_inf_nu * cert.A / (p.alpha_nu * cert.B) *
                               (1.0 + p.gt_nu.sup_norm() + grad_psi_star_at_0);
    cert.pointwise_sufficient_T =
        T > std::max({1.0 / p.alpha_mu, 1.0 / p.alpha_nu, cond_mu, cond_nu});
}

namespace {

double log_exp_moment(const Marginal1D& m, double sigma) {
    return log_sum_exp_terms(m.grid.size(), [&](std::size_t i) {
        const double x = m.grid.nodes[i];
        return sigma * x * x + std::log(m.density_weights[i]);
    });
}

}  // namespace

CkpConstants ckp_constants(const Marginal1D& m) {
    if (!m.normalized) throw std::logic_error("ckp_constants: marginal not normalized");
    const double half_alpha = 0.5 * m.alpha;
    const double lo = half_alpha * 1e-6;
    const double hi = half_alpha * (1.0 - 1e-9);
    auto obj1 = [&](double s) {
        return std::sqrt(2.0 / s + (2.0 / s) * log_exp_moment(m, s));
    };
    auto obj2 = [&](double s) { return 3.0 / s + (2.0 / s) * std::exp(log_exp_moment(m, s)); };
    CkpConstants out;
    out.sigma1 = golden_min(obj1, lo, hi, 1e-8);
    out.sigma2 = golden_min(obj2, lo, hi, 1e-8);
    out.C1 = obj1(out.sigma1);
    out.C2 = obj2(out.sigma2);
    return out;
}

double entropy_bound_constant(double A, double B, const Marginal1D& m, const CkpConstants& ckp,
                              double H) {
    if (H < 0.0) throw std::domain_error("entropy_bound_constant: negative relative entropy");
    const double M1 = moment(m, 1), M2 = moment(m, 2);
    const double base = 3.0 * A * M2 + (A * M1 + B) * M1 + B * M1;
    const double rootH = std::sqrt(H);
    return 2.0 * base + A * ckp.C2 * (rootH + 0.5 * H) + (A * M1 + B) * ckp.C1 * rootH;
}

DriftPair drift_constants(double alpha_eff, double c_lin, int p) {
    if (!(alpha_eff > 0.0)) throw std::domain_error("drift_constants: alpha_eff must be positive");
    if (c_lin < 0.0) throw std::domain_error("drift_constants: negative c_lin");
    DriftPair d;
    if (p == 2) {
        d.A = 0.5 * alpha_eff;
        d.B = 1.0 + d.A + c_lin * c_lin / (2.0 * alpha_eff);
    } else if (p == 4) {
        // Generator bound 6t^2 + 2 c t^3 - 2 a t^4 at |y| = t; keep A = a and
        // absorb the positive part of the remainder q(t) = 6t^2 + 2ct^3 - at^4,
        // maximized at the positive root of q'.
        d.A = alpha_eff;
        const double a = alpha_eff, c = c_lin;
        const double t = (6.0 * c + std::sqrt(36.0 * c * c + 192.0 * a)) / (8.0 * a);
        const double q = 6.0 * t * t + 2.0 * c * t * t * t - a * t * t * t * t;
        d.B = d.A + std::max(0.0, q);
    } else {
        throw std::invalid_argument("drift_constants: p must be 2 or 4");
    }
    return d;
}

double DistortedMetricConstants::phi(double r) const {
    return std::exp(-0.125 * hinge * r * r - 2.0 * std::sqrt(epsilon) * r);
}

namespace {

double lin_interp(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    const double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    return ys[i] + t * (ys[i + 1] - ys[i]);
}

// Nested trapezoid for the feasibility integral
//   int_0^{R1} int_0^s exp( hinge/4 (s^2 - r^2) + 2 sqrt(eps) (s - r) ) dr ds.
double feasibility_integral(double R1, double hinge, double eps, int n) {
    const double se = 2.0 * std::sqrt(eps);
    const double hs = R1 / n;
    double outer = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double s = i * hs;
        double inner = 0.0;
        if (i > 0) {
            const double hr = s / n;
            for (int j = 0; j <= n; ++j) {
                const double r = j * hr;
                const double v = std::exp(0.25 * hinge * (s * s - r * r) + se * (s - r));
                inner += (j == 0 || j == n) ? 0.5 * v : v;
            }
            inner *= hr;
        }
        outer += (i == 0 || i == n) ? 0.5 * inner : inner;
    }
    return outer * hs;
}

double feasibility_integral_refined(double R1, double hinge, double eps) {
    double coarse = feasibility_integral(R1, hinge, eps, 400);
    double fine = feasibility_integral(R1, hinge, eps, 800);
    if (std::abs(fine - coarse) > 1e-6 * std::max(1.0, std::abs(fine)))
        fine = feasibility_integral(R1, hinge, eps, 1600);
    return fine;
}

}  // namespace

DistortedMetricConstants distorted_metric_constants(double alpha_nu, double G_tilde_nu,
                                                    DriftPair d2, DriftPair d4) {
    if (!(d2.A > 0.0) || !(d2.B > 0.0))
        throw std::domain_error("distorted_metric_constants: drift constants must be positive");
    DistortedMetricConstants c;
    c.drift2 = d2;
    c.drift4 = d4;
    c.hinge = std::max(0.0, G_tilde_nu - alpha_nu);
    c.R1 = std::sqrt(2.0 * (2.0 * d2.B / d2.A));
    c.R2 = std::sqrt(2.0 * (4.0 * d2.B * (1.0 + 1.0 / d2.A)));
    c.C_Delta = std::max(3.0, 2.0 + 2.0 * c.R2 * c.R2);

    // Largest feasible epsilon: mass budget 1/(4 B eps) must dominate the
    // double integral, whose value grows with eps while the budget shrinks.
    // Bisection runs on the coarse integral; the chosen value is then
    // re-verified (and if needed shrunk) against the refined one.
    auto margin = [&](double eps) {
        return 1.0 / (4.0 * d2.B * eps) - feasibility_integral(c.R1, c.hinge, eps, 400);
    };
    double lo = 1e-12, hi = 1.0 - 1e-9;
    if (margin(lo) < 0.0)
        throw std::runtime_error("distorted_metric_constants: no feasible epsilon");
    double eps_star;
    if (margin(hi) >= 0.0) {
        eps_star = hi;
    } else {
        for (int it = 0; it < 48; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (margin(mid) >= 0.0)
                lo = mid;
            else
                hi = mid;
        }
        eps_star = lo;
    }
    c.epsilon = 0.98 * eps_star;
    for (int guard = 0; guard < 60; ++guard) {
        const double rhs = feasibility_integral_refined(c.R1, c.hinge, c.epsilon);
        c.epsilon_slack = 1.0 / (4.0 * d2.B * c.epsilon) / rhs;
        if (c.epsilon_slack >= 1.01) break;
        c.epsilon *= 0.9;
    }

    // Dense tabulation of phi, its antiderivative and the modulation factor,
    // with R1 placed exactly on the grid.
    const int n_half = 2000;
    std::vector<double> r;
    r.reserve(2 * n_half + 1);
    for (int i = 0; i <= n_half; ++i) r.push_back(c.R1 * i / n_half);
    for (int i = 1; i <= n_half; ++i) r.push_back(c.R1 + (c.R2 - c.R1) * i / n_half);
    const std::size_t N = r.size();

    std::vector<double> phi_v(N);
    for (std::size_t i = 0; i < N; ++i) phi_v[i] = c.phi(r[i]);
    const auto Phi = cum_trapezoid(r, phi_v);
    std::vector<double> ratio(N);
    for (std::size_t i = 0; i < N; ++i) ratio[i] = Phi[i] / phi_v[i];
    const auto I = cum_trapezoid(r, ratio);
    const double I_R1 = I[n_half];
    const double I_R2 = I.back();
    c.xi = 1.0 / I_R1;
    c.beta_const = 1.0 / I_R2;

    std::vector<double> g_v(N), integrand(N);
    for (std::size_t i = 0; i < N; ++i) {
        const double I_r1 = i <= static_cast<std::size_t>(n_half) ? I[i] : I_R1;
        g_v[i] = 1.0 - I_r1 / (4.0 * I_R1) - I[i] / (4.0 * I_R2);
        integrand[i] = phi_v[i] * g_v[i];
    }
    c.f_grid_r = r;
    c.f_grid_v = cum_trapezoid(r, integrand);
    c.g_grid_v = std::move(g_v);
    c.f_at_R2 = c.f_grid_v.back();

    c.C_I = c.phi(c.R2);
    c.lambda = std::min({c.beta_const, d2.A, 4.0 * d2.A * d2.B * c.epsilon}) / 2.0;
    return c;
}

double DistortedMetricConstants::f(double r) const {
    if (r >= R2) return f_at_R2;
    if (r <= 0.0) return 0.0;
    return lin_interp(f_grid_r, f_grid_v, r);
}

double DistortedMetricConstants::f_over_phi(double r) const {
    if (r >= R2) return 0.0;
    if (r <= 0.0) return g_grid_v.front();
    return lin_interp(f_grid_r, g_grid_v, r);
}

HessianRate hessian_rate_constant(double x, double T, const DistortedMetricConstants& dmc,
                                  const HessianRateInputs& in) {
    if (!(dmc.lambda > 0.0)) throw std::domain_error("hessian_rate_constant: lambda <= 0");
    if (!(in.alpha_nu > 0.0)) throw std::domain_error("hessian_rate_constant: alpha_nu <= 0");

    // Conditional first-moment envelope constants, from the uniform convexity
    // floor alpha_nu: sup over iterates of E|Y| <= |x|/(T alpha_nu) + C2.
    const double C1_mom = 1.0 / in.alpha_nu;
    const double C2_mom = (1.0 + in.gt_nu_sup + in.grad_psi_star_at_0 + in.B) / in.alpha_nu;
    const double C_x = std::max(1.0, C1_mom * std::abs(x) / T + C2_mom);

    const double eps = dmc.epsilon;
    const double sqrt_eps = std::sqrt(eps);
    const double A2 = dmc.drift2.A, B2 = dmc.drift2.B;
    const double A4 = dmc.drift4.A, B4 = dmc.drift4.B;
    const double theta_star = in.alpha_psi_star + 1.0 / T;
    const double lin = std::abs(x) / T + 1.0 + in.gt_nu_sup + in.grad_psi_star_at_0;

    auto log_moment_envelope = [&](double t) {
        const double lt = std::log(t), le = std::log(eps);
        std::vector<double> terms;
        if (in.B > 0.0) {
            const double lb = std::log(in.B);
            terms.push_back(lb + lt);
            terms.push_back(lb + lt + le + std::log(B2 / A2));
            terms.push_back(lb + lt + le + std::log(B2 / A2) + t * A2);
            terms.push_back(lb + 2.0 * lt + le + std::log(B2) + t * A2);
        }
        if (in.A > 0.0) {
            const double la = std::log(in.A);
            terms.push_back(la + lt - std::log(theta_star) + std::log(lin));
            terms.push_back(la + le + lt + std::log(B2 / A2));
            terms.push_back(la + le + lt + std::log(B4 / A4));
            terms.push_back(la + le + lt + std::log(B4 / A4) + t * A4);
            terms.push_back(la + le + 2.0 * lt + std::log(B4) + t * A4);
        }
        return log_sum_exp(terms);
    };

    const double t_min = std::log(dmc.C_Delta) / dmc.lambda;
    const double t_max = t_min + 50.0 / dmc.lambda;
    const double log_pref = std::log(10.0 / 3.0) + std::log(C_x) - 2.0 * std::log(T) -
                            0.5 * std::log(eps) +
                            std::log(std::max(2.0 / dmc.C_I, 1.0 / (dmc.f_at_R2 * sqrt_eps))) +
                            std::log(dmc.C_Delta) - std::log(2.0);
    auto log_obj = [&](double t) {
        const double pole = dmc.C_Delta * std::exp(-dmc.lambda * t);
        if (pole >= 1.0) return kInf;
        return log_pref - std::log1p(-pole) + (dmc.hinge / dmc.C_I) * t + log_moment_envelope(t);
    };

    const double a = t_min + 1e-6 * (t_max - t_min);
    const double t_star = golden_min(log_obj, a, t_max, 1e-10);
    HessianRate out;
    out.t_star = t_star;
    out.log_value = log_obj(t_star);
    out.value = std::exp(out.log_value);
    return out;
}

}  // namespace eotlab
