#include "eotlab/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace eotlab {

namespace {

using nlohmann::json;

json num_or_inf(double v) {
    if (std::isinf(v)) return json(v > 0 ? "inf" : "-inf");
    return json(v);
}

double from_num_or_inf(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        throw std::runtime_error("certificate: unexpected string value " + s);
    }
    return j.get<double>();
}

json vec_to_json(const std::vector<double>& v) {
    json out = json::array();
    for (double x : v) out.push_back(num_or_inf(x));
    return out;
}

std::vector<double> vec_from_json(const json& j) {
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& e : j) out.push_back(from_num_or_inf(e));
    return out;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string certificate_to_json(const CertificateBundle& b) {
    json j;
    j["T"] = b.cert.T;
    j["alpha_mu"] = b.alpha_mu;
    j["alpha_nu"] = b.alpha_nu;
    j["beta_mu"] = num_or_inf(b.beta_mu);
    j["beta_nu"] = num_or_inf(b.beta_nu);
    j["gamma_mu"] = vec_to_json(b.cert.gamma_mu);
    j["gamma_nu"] = vec_to_json(b.cert.gamma_nu);
    j["gamma_inf_mu"] = b.cert.gamma_inf_mu;
    j["gamma_inf_nu"] = b.cert.gamma_inf_nu;
    j["hat_gamma_mu"] = vec_to_json(b.cert.hat_gamma_mu);
    j["hat_gamma_nu"] = vec_to_json(b.cert.hat_gamma_nu);
    j["hat_gamma_inf_mu"] = b.cert.hat_gamma_inf_mu;
    j["hat_gamma_inf_nu"] = b.cert.hat_gamma_inf_nu;
    j["product_rho"] = b.cert.product_rho;
    j["pointwise_rho"] = b.cert.pointwise_rho;
    j["contraction_certified"] = b.cert.contraction_certified;
    j["pointwise_certified"] = b.cert.pointwise_certified;
    j["A"] = b.cert.A;
    j["B"] = b.cert.B;
    j["alpha_phi_star"] = b.cert.alpha_phi_star;
    j["alpha_psi_star"] = b.cert.alpha_psi_star;
    j["tanh_display_gamma_inf_mu"] = b.cert.tanh_display_gamma_inf_mu;
    j["tanh_display_gamma_inf_nu"] = b.cert.tanh_display_gamma_inf_nu;
    j["tanh_display_discrepant"] = b.cert.tanh_display_discrepant;
    j["pointwise_sufficient_T"] = b.cert.pointwise_sufficient_T;
    j["thresholds"] = {{"sufficient_T", num_or_inf(b.threshold.threshold)},
                       {"certified", b.threshold.certified},
                       {"branch", b.threshold.branch}};
    j["D_mu"] = b.D_mu;
    j["D_nu"] = b.D_nu;
    j["grad_phi0_abs"] = b.grad_phi0_abs;
    j["grad_psi0_abs"] = b.grad_psi0_abs;
    j["hess_probe_x"] = vec_to_json(b.hess_probe_x);
    j["hess_probe_C"] = vec_to_json(b.hess_probe_C);
    j["hess_probe_logC"] = vec_to_json(b.hess_probe_logC);
    j["initial_l1_grad_nu"] = b.initial_l1_grad_nu;
    return j.dump(2) + "\n";
}

CertificateBundle certificate_from_json(const std::string& text) {
    json j = json::parse(text);
    CertificateBundle b;
    b.cert.T = j.at("T").get<double>();
    b.alpha_mu = j.at("alpha_mu").get<double>();
    b.alpha_nu = j.at("alpha_nu").get<double>();
    b.beta_mu = from_num_or_inf(j.at("beta_mu"));
    b.beta_nu = from_num_or_inf(j.at("beta_nu"));
    b.cert.gamma_mu = vec_from_json(j.at("gamma_mu"));
    b.cert.gamma_nu = vec_from_json(j.at("gamma_nu"));
    b.cert.gamma_inf_mu = j.at("gamma_inf_mu").get<double>();
    b.cert.gamma_inf_nu = j.at("gamma_inf_nu").get<double>();
    b.cert.hat_gamma_mu = vec_from_json(j.at("hat_gamma_mu"));
    b.cert.hat_gamma_nu = vec_from_json(j.at("hat_gamma_nu"));
    b.cert.hat_gamma_inf_mu = j.at("hat_gamma_inf_mu").get<double>();
    b.cert.hat_gamma_inf_nu = j.at("hat_gamma_inf_nu").get<double>();
    b.cert.product_rho = j.at("product_rho").get<double>();
    b.cert.pointwise_rho = j.at("pointwise_rho").get<double>();
    b.cert.contraction_certified = j.at("contraction_certified").get<bool>();
    b.cert.pointwise_certified = j.at("pointwise_certified").get<bool>();
    b.cert.A = j.at("A").get<double>();
    b.cert.B = j.at("B").get<double>();
    b.cert.alpha_phi_star = j.at("alpha_phi_star").get<double>();
    b.cert.alpha_psi_star = j.at("alpha_psi_star").get<double>();
    b.cert.tanh_display_gamma_inf_mu = j.at("tanh_display_gamma_inf_mu").get<double>();
    b.cert.tanh_display_gamma_inf_nu = j.at("tanh_display_gamma_inf_nu").get<double>();
    b.cert.tanh_display_discrepant = j.at("tanh_display_discrepant").get<bool>();
    b.cert.pointwise_sufficient_T = j.at("pointwise_sufficient_T").get<bool>();
    b.threshold.threshold = from_num_or_inf(j.at("thresholds").at("sufficient_T"));
    b.threshold.certified = j.at("thresholds").at("certified").get<bool>();
    b.threshold.branch = j.at("thresholds").at("branch").get<std::string>();
    b.D_mu = j.at("D_mu").get<double>();
    b.D_nu = j.at("D_nu").get<double>();
    b.grad_phi0_abs = j.at("grad_phi0_abs").get<double>();
    b.grad_psi0_abs = j.at("grad_psi0_abs").get<double>();
    b.hess_probe_x = vec_from_json(j.at("hess_probe_x"));
    b.hess_probe_C = vec_from_json(j.at("hess_probe_C"));
    b.hess_probe_logC = vec_from_json(j.at("hess_probe_logC"));
    b.initial_l1_grad_nu = j.at("initial_l1_grad_nu").get<double>();
    return b;
}

std::string certificate_table(const CertificateBundle& b) {
    std::ostringstream ss;
    auto row = [&](const char* name, const std::string& v) {
        ss << "  " << name;
        for (std::size_t k = std::string(name).size(); k < 28; ++k) ss << ' ';
        ss << v << "\n";
    };
    ss << "rate certificate\n";
    row("T", fmt17(b.cert.T));
    row("alpha_mu / alpha_nu", fmt17(b.alpha_mu) + " / " + fmt17(b.alpha_nu));
    row("beta_mu / beta_nu", fmt17(b.beta_mu) + " / " + fmt17(b.beta_nu));
    row("alpha_phi* / alpha_psi*", fmt17(b.cert.alpha_phi_star) + " / " + fmt17(b.cert.alpha_psi_star));
    row("gamma_inf_mu / nu", fmt17(b.cert.gamma_inf_mu) + " / " + fmt17(b.cert.gamma_inf_nu));
    row("product_rho", fmt17(b.cert.product_rho));
    row("contraction_certified", b.cert.contraction_certified ? "yes" : "no");
    row("A / B", fmt17(b.cert.A) + " / " + fmt17(b.cert.B));
    row("hat_gamma_inf_mu / nu", fmt17(b.cert.hat_gamma_inf_mu) + " / " + fmt17(b.cert.hat_gamma_inf_nu));
    row("pointwise_rho", fmt17(b.cert.pointwise_rho));
    row("pointwise_certified", b.cert.pointwise_certified ? "yes" : "no");
    row("sufficient_T threshold", fmt17(b.threshold.threshold) + " (" + b.threshold.branch + ")");
    row("T above threshold", b.threshold.certified ? "yes" : "no");
    row("D_mu / D_nu", fmt17(b.D_mu) + " / " + fmt17(b.D_nu));
    if (b.cert.tanh_display_discrepant) {
        row("tanh display gamma_inf", fmt17(b.cert.tanh_display_gamma_inf_mu) + " / " +
                                          fmt17(b.cert.tanh_display_gamma_inf_nu));
        ss << "  note: simplified tanh-family display value differs from the general\n"
              "  formula value; the general value is used everywhere above.\n";
    }
    return ss.str();
}

void write_certificate(const std::string& path, const CertificateBundle& b) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_certificate: cannot open " + path);
    out << certificate_to_json(b);
}

CertificateBundle read_certificate(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_certificate: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return certificate_from_json(ss.str());
}

namespace {
constexpr const char* kCsvHeader =
    "n,l1_grad_mu,l1_grad_nu,w1_plan_nn,w1_plan_n1n,sym_ent_nn,sym_ent_n1n,"
    "hess_err_max,pointwise_ratio_max,h_mu_n,h_nu_n,predicted_product_bound";
}

void write_history_csv(const std::string& path, std::span<const ConvergenceRecord> history) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_history_csv: cannot open " + path);
    out << kCsvHeader << "\n";
    for (const auto& r : history) {
        out << r.n << ',' << fmt17(r.l1_grad_mu) << ',' << fmt17(r.l1_grad_nu) << ','
            << fmt17(r.w1_plan_nn) << ',' << fmt17(r.w1_plan_n1n) << ',' << fmt17(r.sym_ent_nn)
            << ',' << fmt17(r.sym_ent_n1n) << ',' << fmt17(r.hess_err_max) << ','
            << fmt17(r.pointwise_ratio_max) << ',' << fmt17(r.h_mu_n) << ',' << fmt17(r.h_nu_n)
            << ',' << fmt17(r.predicted_product_bound) << "\n";
    }
}

std::vector<ConvergenceRecord> read_history_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_history_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("read_history_csv: empty file");
    if (line != kCsvHeader) throw std::runtime_error("read_history_csv: unexpected header");
    std::vector<ConvergenceRecord> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
        if (vals.size() != 12) throw std::runtime_error("read_history_csv: bad row");
        ConvergenceRecord r;
        r.n = static_cast<int>(vals[0]);
        r.l1_grad_mu = vals[1];
        r.l1_grad_nu = vals[2];
        r.w1_plan_nn = vals[3];
        r.w1_plan_n1n = vals[4];
        r.sym_ent_nn = vals[5];
        r.sym_ent_n1n = vals[6];
        r.hess_err_max = vals[7];
        r.pointwise_ratio_max = vals[8];
        r.h_mu_n = vals[9];
        r.h_nu_n = vals[10];
        r.predicted_product_bound = vals[11];
        out.push_back(r);
    }
    if (out.empty()) throw std::runtime_error("read_history_csv: no rows");
    return out;
}

Marginal1D marginal_from_config(const FamilyConfig& f, double profile_R) {
    if (f.family == "gaussian") return make_gaussian(f.mean, f.var);
    if (f.family == "perturbed_gaussian")
        return make_perturbed_gaussian(f.mean, f.var, f.amplitude, f.frequency, profile_R);
    throw ConfigError("marginal_from_config: unknown family " + f.family);
}

ExperimentArtifacts run_experiment(const ExperimentConfig& cfg) {
    Marginal1D mu = normalize(marginal_from_config(cfg.mu, cfg.profile_R), cfg.n_nodes,
                              cfg.tail_budget);
    Marginal1D nu = normalize(marginal_from_config(cfg.nu, cfg.profile_R), cfg.n_nodes,
                              cfg.tail_budget);
    ExperimentArtifacts art{make_problem(std::move(mu), std::move(nu), cfg.T), {}, {}, {}};
    const SinkhornProblem& prob = art.problem;

    if (cfg.effective_reference() == "gaussian_oracle") {
        const GaussianEOT sol =
            solve_gaussian(cfg.mu.mean, cfg.mu.var, cfg.nu.mean, cfg.nu.var, cfg.T);
        art.ref = reference_from_oracle(prob, sol);
    } else {
        art.ref = reference_long_run(prob, 3 * cfg.max_iters, 1e-13);
    }

    const RateParams params = rate_params_from(prob.mu, prob.nu, cfg.T);
    const int n_terms = cfg.n_terms > 0 ? cfg.n_terms : cfg.max_iters + 2;
    const AlphaSchedule mu_sched = alpha_sequence(params, Side::Mu, n_terms, cfg.fp_tol);
    const AlphaSchedule nu_sched = alpha_sequence(params, Side::Nu, n_terms, cfg.fp_tol);
    CertificateBundle b;
    b.cert = gamma_sequence(params, mu_sched, nu_sched);
    std::vector<double> psi0_grid;
    if (cfg.initialization == "custom") {
        const Pchip table(cfg.psi0_nodes, cfg.psi0_values);
        psi0_grid.resize(prob.nu.grid.size());
        for (std::size_t j = 0; j < psi0_grid.size(); ++j)
            psi0_grid[j] = table.value(prob.nu.grid.nodes[j]);
        // Fit a linear envelope to the actual start gap instead of the
        // null-start constants.
        const auto gap = initial_psi_gradient_gap(prob, art.ref, psi0_grid);
        double B = 1e-12, A = 1e-12;
        for (std::size_t j = 0; j < gap.size(); ++j)
            if (std::abs(prob.nu.grid.nodes[j]) < 1e-9) B = std::max(B, gap[j]);
        std::size_t j0 = 0;
        for (std::size_t j = 1; j < gap.size(); ++j)
            if (std::abs(prob.nu.grid.nodes[j]) < std::abs(prob.nu.grid.nodes[j0])) j0 = j;
        B = std::max(B, gap[j0]);
        for (std::size_t j = 0; j < gap.size(); ++j) {
            const double ax = std::abs(prob.nu.grid.nodes[j]);
            if (ax > 1e-9) A = std::max(A, (gap[j] - B) / ax);
        }
        b.cert.A = A;
        b.cert.B = B;
    } else {
        const LinearGrowth lg = init_linear_growth(b.cert.alpha_phi_star, cfg.T,
                                                   params.gt_mu.sup_norm(), art.ref.grad_phi0_abs);
        b.cert.A = lg.A;
        b.cert.B = lg.B;
    }
    hat_gamma(b.cert, params, art.ref.grad_phi0_abs, art.ref.grad_psi0_abs);
    b.threshold = sufficient_T(params);
    b.alpha_mu = params.alpha_mu;
    b.alpha_nu = params.alpha_nu;
    b.beta_mu = params.beta_mu;
    b.beta_nu = params.beta_nu;
    b.grad_phi0_abs = art.ref.grad_phi0_abs;
    b.grad_psi0_abs = art.ref.grad_psi0_abs;

    RunOptions opt;
    opt.max_iters = cfg.max_iters;
    opt.stop_tol = cfg.stop_tol;
    opt.psi0 = std::move(psi0_grid);
    art.run = run_sinkhorn(prob, art.ref, b.cert.A, b.cert.B, b.cert.gamma_mu, b.cert.gamma_nu,
                           opt);
    if (art.run.diverged) throw NumericalError("run_experiment: divergence detected");

    const CkpConstants ckp_mu = ckp_constants(prob.mu);
    const CkpConstants ckp_nu = ckp_constants(prob.nu);
    b.D_mu = entropy_bound_constant(b.cert.A, b.cert.B, prob.mu, ckp_mu, art.run.h_mu_first);
    b.D_nu = entropy_bound_constant(b.cert.A, b.cert.B, prob.nu, ckp_nu, art.run.h_nu_first);

    // Hessian-rate prefactor on the probe set, drift data taken per point.
    b.hess_probe_x = {-2.0, -1.0, 0.0, 1.0, 2.0};
    for (double x : b.hess_probe_x) {
        const double alpha_eff = b.cert.alpha_psi_star + 1.0 / cfg.T;
        const double c_lin =
            params.gt_nu.sup_norm() + art.ref.grad_psi0_abs + std::abs(x) / cfg.T;
        const DriftPair d2 = drift_constants(alpha_eff, c_lin, 2);
        const DriftPair d4 = drift_constants(alpha_eff, c_lin, 4);
        const DistortedMetricConstants dmc = distorted_metric_constants(
            params.alpha_nu, params.gt_nu.slope_at_zero(), d2, d4);
        HessianRateInputs in;
        in.A = b.cert.A;
        in.B = b.cert.B;
        in.alpha_psi_star = b.cert.alpha_psi_star;
        in.gt_nu_sup = params.gt_nu.sup_norm();
        in.grad_psi_star_at_0 = art.ref.grad_psi0_abs;
        in.alpha_nu = params.alpha_nu;
        const HessianRate hr = hessian_rate_constant(x, cfg.T, dmc, in);
        b.hess_probe_C.push_back(hr.value);
        b.hess_probe_logC.push_back(hr.log_value);
    }
    b.initial_l1_grad_nu = art.run.history.front().l1_grad_nu;
    art.bundle = std::move(b);
    return art;
}

namespace {

struct Checker {
    VerifyReport report;
    void expect(bool ok, const std::string& name, const std::string& detail) {
        report.checks.push_back(name);
        if (!ok) {
            report.pass = false;
            report.violations.push_back(name + ": " + detail);
        }
    }
};

}  // namespace

VerifyReport verify_history(std::span<const ConvergenceRecord> history,
                            const CertificateBundle& b) {
    Checker ck;
    constexpr double tol = 1e-6;  // multiplicative slack on inequality checks
    const double T = b.cert.T;
    const double init = b.initial_l1_grad_nu;
    const auto& gm = b.cert.gamma_mu;
    const auto& gn = b.cert.gamma_nu;
    const auto& hm = b.cert.hat_gamma_mu;
    const auto& hn = b.cert.hat_gamma_nu;
    auto gamma_at = [](const std::vector<double>& g, std::size_t k) {
        return g.empty() ? 1.0 : g[std::min(k, g.size() - 1)];
    };

    ck.expect(!history.empty() && history.front().n == 0, "history-shape",
              "first row must have n = 0");
    if (history.empty()) return ck.report;

    // Row 0 carries the start: the pointwise ratio is the linear-growth
    // assumption itself.
    ck.expect(history[0].pointwise_ratio_max <= 1.0 + tol, "linear-growth-start",
              "pointwise ratio at the start exceeds 1: " +
                  std::to_string(history[0].pointwise_ratio_max));

    double prod = 1.0, hat_prod = 1.0, hat_prod_lag = 1.0;
    for (std::size_t n = 1; n < history.size(); ++n) {
        const auto& r = history[n];
        const std::size_t k = n - 1;
        prod *= gamma_at(gm, k) * gamma_at(gn, k) / (T * T);
        if (n >= 2) hat_prod_lag *= gamma_at(hm, n - 2) * gamma_at(hn, n - 2) / (T * T);
        hat_prod *= gamma_at(hm, k) * gamma_at(hn, k) / (T * T);
        const std::string at = " at n=" + std::to_string(r.n);

        ck.expect(std::abs(r.predicted_product_bound - prod) <=
                      1e-9 * std::max(1.0, std::abs(prod)),
                  "product-column", "recorded certified product disagrees" + at);
        ck.expect(r.l1_grad_nu <= prod * init * (1.0 + tol), "theorem-l1-nu",
                  "nu-side integrated gradient gap above its certified envelope" + at);
        ck.expect(r.l1_grad_mu <= T / gamma_at(gm, k) * prod * init * (1.0 + tol),
                  "theorem-l1-mu",
                  "mu-side integrated gradient gap above its certified envelope" + at);
        ck.expect(r.w1_plan_nn <= T * prod * init * (1.0 + tol), "theorem-w1-nn",
                  "diagonal-plan transport bound above its certified envelope" + at);
        ck.expect(r.w1_plan_n1n <= gamma_at(gn, n) * prod * init * (1.0 + tol), "theorem-w1-n1n",
                  "lagged-plan transport bound above its certified envelope" + at);
        if (!hm.empty()) {
            ck.expect(r.pointwise_ratio_max <= hat_prod * (1.0 + tol), "theorem-pointwise",
                      "pointwise gradient ratio above its certified envelope" + at);
            ck.expect(r.sym_ent_nn <=
                          b.D_mu * T / gamma_at(hm, k) * hat_prod * (1.0 + tol) + 1e-15,
                      "theorem-sym-ent-nn",
                      "diagonal-plan symmetric entropy above its envelope" + at);
            ck.expect(r.sym_ent_n1n <= b.D_nu * hat_prod * (1.0 + tol) + 1e-15,
                      "theorem-sym-ent-n1n",
                      "lagged-plan symmetric entropy above its envelope" + at);
            if (!b.hess_probe_logC.empty()) {
                const double logC_max =
                    *std::max_element(b.hess_probe_logC.begin(), b.hess_probe_logC.end());
                const bool ok = !std::isfinite(logC_max) ||
                                std::log(std::max(r.hess_err_max, 1e-300)) <=
                                    logC_max + std::log(hat_prod_lag) + std::log1p(tol);
                ck.expect(ok, "theorem-hessian",
                          "Hessian gap above its certified envelope" + at);
            }
        }
        ck.expect(r.h_mu_n <= history[n - 1].h_mu_n * (1.0 + 1e-9) + 1e-12, "entropy-monotone-mu",
                  "adjusted mu-marginal entropy increased" + at);
        ck.expect(r.h_nu_n <= history[n - 1].h_nu_n * (1.0 + 1e-9) + 1e-12, "entropy-monotone-nu",
                  "adjusted nu-marginal entropy increased" + at);
    }
    // Row 0 lagged-plan transport bound also sits under its envelope.
    ck.expect(history[0].w1_plan_n1n <= gamma_at(gn, 0) * init * (1.0 + tol), "theorem-w1-n1n",
              "lagged-plan transport bound above its certified envelope at n=0");
    return ck.report;
}

}  // namespace eotlab
