#include "brwsim/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "brwsim/errors.hpp"

namespace brwsim {

using nlohmann::json;

std::uint64_t fnv1a(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string ExperimentConfig::canonical_json() const {
    json j;
    j["dimension"] = dimension;
    j["kernel_type"] = kernel_type;
    json jumps = json::array();
    for (const auto& jm : custom_jumps)
        jumps.push_back({{"offset", jm.offset}, {"prob", jm.prob}});
    j["custom_jumps"] = jumps;
    j["branching_type"] = branching_type;
    j["rho"] = rho;
    j["sigma_values"] = sigma_values;
    j["extension_slope"] = extension_slope;
    j["theta"] = theta;
    j["init"] = init;
    j["n_ladder"] = n_ladder;
    j["grid"] = grid;
    j["replicates"] = replicates;
    j["seed"] = seed;
    j["safety_multiplier"] = safety_multiplier;
    j["torus_side"] = torus_side;
    j["t_burn"] = t_burn;
    if (sigma_eq) j["sigma_eq"] = *sigma_eq;
    // out_dir, workers and n_paths deliberately excluded: they do not
    // change what is computed per replicate.
    return j.dump();  // nlohmann objects iterate in sorted key order
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a(canonical_json()); }

WalkKernel ExperimentConfig::make_kernel() const {
    if (kernel_type == "srw") return srw_kernel(dimension);
    if (kernel_type == "custom") {
        if (custom_jumps.empty()) throw ConfigError("custom kernel needs jumps");
        std::vector<std::pair<Offset, double>> spec;
        for (const auto& j : custom_jumps) spec.emplace_back(j.offset, j.prob);
        return build_kernel(spec, "custom");
    }
    throw ConfigError("unknown kernel_type '" + kernel_type + "'");
}

BranchingRate ExperimentConfig::make_rate() const {
    if (branching_type == "independent") return BranchingRate::independent(rho);
    if (branching_type == "tabulated")
        return BranchingRate::tabulated(sigma_values, extension_slope);
    throw ConfigError("unknown branching_type '" + branching_type + "'");
}

InitLaw ExperimentConfig::init_law() const {
    if (init == "poisson") return InitLaw::Poisson;
    if (init == "equilibrium") return InitLaw::Equilibrium;
    throw ConfigError("init must be 'poisson' or 'equilibrium'");
}

SimParams ExperimentConfig::make_sim_params() const {
    SimParams p;
    p.kernel = make_kernel();
    p.rate = make_rate();
    p.theta = theta;
    p.torus_side = torus_side;
    p.safety_multiplier = safety_multiplier;
    p.seed = seed;
    p.init = init_law() == InitLaw::Equilibrium ? InitKind::Burnin : InitKind::Poisson;
    p.t_burn = t_burn;
    return p;
}

void ExperimentConfig::validate() const {
    if (dimension < 1 || dimension > 6) throw ConfigError("dimension must be in [1, 6]");
    if (!(theta >= 0.0)) throw ConfigError("theta must be nonnegative");
    if (replicates == 0) throw ConfigError("replicates must be positive");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (grid.empty()) throw ConfigError("grid must be nonempty");
    double prev = 0.0;
    for (double t : grid) {
        if (!(t > prev)) throw ConfigError("grid must be strictly increasing and positive");
        prev = t;
    }
    for (double n : n_ladder)
        if (!(n > 0.0)) throw ConfigError("N ladder entries must be positive");
    if (torus_side != 0 && (torus_side < 3 || torus_side % 2 == 0))
        throw ConfigError("torus_side must be 0 (derived) or an odd integer >= 3");
    init_law();
    try {
        make_kernel();
        make_rate();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(std::string("invalid model spec: ") + e.what());
    }
    if (int(grid.size()) > 0 && make_kernel().dimension != dimension)
        throw ConfigError("kernel dimension does not match 'dimension'");
}

namespace {

ExperimentConfig from_json(const json& j) {
    ExperimentConfig c;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("dimension", c.dimension);
    get("kernel_type", c.kernel_type);
    if (j.contains("custom_jumps"))
        for (const auto& e : j.at("custom_jumps")) {
            Jump jm;
            jm.offset = e.at("offset").get<Offset>();
            jm.prob = e.at("prob").get<double>();
            c.custom_jumps.push_back(std::move(jm));
        }
    get("branching_type", c.branching_type);
    get("rho", c.rho);
    get("sigma_values", c.sigma_values);
    get("extension_slope", c.extension_slope);
    get("theta", c.theta);
    get("init", c.init);
    get("n_ladder", c.n_ladder);
    get("grid", c.grid);
    get("replicates", c.replicates);
    get("seed", c.seed);
    get("safety_multiplier", c.safety_multiplier);
    get("t_burn", c.t_burn);
    get("torus_side", c.torus_side);
    get("out_dir", c.out_dir);
    get("workers", c.workers);
    get("n_paths", c.n_paths);
    if (j.contains("sigma_eq")) c.sigma_eq = j.at("sigma_eq").get<double>();
    return c;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    ExperimentConfig c;
    try {
        c = from_json(j);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config field has wrong type: ") + e.what());
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

ExperimentConfig profile_config(const std::string& name) {
    ExperimentConfig c;
    if (name == "d3-poisson") {
        c.dimension = 3;
        c.init = "poisson";
    } else if (name == "d3-equilibrium") {
        c.dimension = 3;
        c.init = "equilibrium";
    } else if (name == "d4") {
        c.dimension = 4;
        c.init = "poisson";
        c.n_ladder = {8.0, 16.0, 32.0};
    } else if (name == "d5") {
        c.dimension = 5;
        c.init = "poisson";
        c.n_ladder = {8.0, 16.0, 32.0};
    } else if (name == "state-dependent") {
        c.dimension = 3;
        c.init = "equilibrium";
        c.branching_type = "tabulated";
        c.sigma_values = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 5.0};  // sigma(k) = min(k, 5)
        c.extension_slope = 0.0;
    } else {
        throw ConfigError("unknown profile '" + name + "'");
    }
    c.validate();
    return c;
}

}  // namespace brwsim
