#include "eotlab/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace eotlab {

namespace {

using nlohmann::json;

FamilyConfig parse_family(const json& j, const char* which) {
    if (!j.is_object() || !j.contains("family"))
        throw ConfigError(std::string(which) + ": expected an object with a \"family\" field");
    FamilyConfig f;
    f.family = j.at("family").get<std::string>();
    if (f.family != "gaussian" && f.family != "perturbed_gaussian")
        throw ConfigError(std::string(which) + ": unknown family \"" + f.family + "\"");
    f.mean = j.value("mean", 0.0);
    f.var = j.value("var", 1.0);
    if (!(f.var > 0.0)) throw ConfigError(std::string(which) + ": var must be positive");
    if (f.family == "perturbed_gaussian") {
        if (!j.contains("amplitude") || !j.contains("frequency"))
            throw ConfigError(std::string(which) +
                              ": perturbed_gaussian needs amplitude and frequency");
        f.amplitude = j.at("amplitude").get<double>();
        f.frequency = j.at("frequency").get<double>();
        if (f.amplitude < 0.0 || f.frequency < 0.0)
            throw ConfigError(std::string(which) + ": negative perturbation parameters");
    }
    return f;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
    for (const char* key : {"mu", "nu", "T"})
        if (!j.contains(key)) throw ConfigError(std::string("config: missing required field \"") + key + "\"");

    ExperimentConfig c;
    c.mu = parse_family(j.at("mu"), "mu");
    c.nu = parse_family(j.at("nu"), "nu");
    c.T = j.at("T").get<double>();
    if (!(c.T > 0.0)) throw ConfigError("config: T must be positive");

    c.n_nodes = j.value("n_nodes", 1024);
    if (c.n_nodes < 16) throw ConfigError("config: n_nodes must be >= 16");
    c.tail_budget = j.value("tail_budget", 1e-12);
    if (!(c.tail_budget > 0.0) || c.tail_budget > 1e-3)
        throw ConfigError("config: tail_budget outside (0, 1e-3]");
    c.max_iters = j.value("max_iters", 30);
    if (c.max_iters < 1) throw ConfigError("config: max_iters must be >= 1");
    c.stop_tol = j.value("stop_tol", 1e-12);
    if (c.stop_tol < 0.0) throw ConfigError("config: stop_tol must be >= 0");
    c.fp_tol = j.value("fp_tol", 1e-10);
    if (!(c.fp_tol > 0.0)) throw ConfigError("config: fp_tol must be positive");
    c.n_terms = j.value("n_terms", 0);
    c.profile_R = j.value("profile_R", 1.0);
    if (!(c.profile_R > 0.0)) throw ConfigError("config: profile_R must be positive");

    if (j.contains("initialization")) {
        const auto& init = j.at("initialization");
        if (init.is_string()) {
            c.initialization = init.get<std::string>();
            if (c.initialization != "phi_zero")
                throw ConfigError("config: unknown initialization \"" + c.initialization + "\"");
        } else if (init.is_object()) {
            c.initialization = "custom";
            c.psi0_nodes = init.at("psi0_nodes").get<std::vector<double>>();
            c.psi0_values = init.at("psi0_values").get<std::vector<double>>();
            if (c.psi0_nodes.size() != c.psi0_values.size() || c.psi0_nodes.size() < 2)
                throw ConfigError("config: custom psi0 table needs >= 2 matched entries");
        } else {
            throw ConfigError("config: initialization must be a string or an object");
        }
    }

    c.reference = j.value("reference", std::string());
    if (!c.reference.empty() && c.reference != "gaussian_oracle" && c.reference != "long_run")
        throw ConfigError("config: unknown reference \"" + c.reference + "\"");
    if (c.effective_reference() == "gaussian_oracle" && !c.gaussian_pair())
        throw ConfigError(
            "config: reference \"gaussian_oracle\" requires both marginals gaussian; "
            "use \"long_run\" for perturbed or custom families");

    c.output_path = j.value("output_path", std::string("eotlab_out"));
    c.seed = j.value("seed", 42ull);
    c.n_pairs = j.value("n_pairs", 100);
    if (c.n_pairs < 1) throw ConfigError("config: n_pairs must be >= 1");
    c.probe_points = j.value("probe_points", 33);
    if (c.probe_points < 1) throw ConfigError("config: probe_points must be >= 1");
    return c;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace eotlab
