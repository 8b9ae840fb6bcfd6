#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "brwsim/branching_rate.hpp"
#include "brwsim/simulator.hpp"
#include "brwsim/walk_kernel.hpp"

namespace brwsim {

// One JSON document describing a full experiment.  The canonical form (and
// therefore the config hash) depends only on the effective field values,
// never on key order in the source file.
struct ExperimentConfig {
    int dimension = 3;
    std::string kernel_type = "srw";  // "srw" or "custom"
    std::vector<Jump> custom_jumps;

    std::string branching_type = "independent";  // or "tabulated"
    double rho = 1.0;
    std::vector<double> sigma_values;
    double extension_slope = -1.0;  // < 0: continue with the last table slope

    double theta = 1.0;
    std::string init = "poisson";  // or "equilibrium"
    std::vector<double> n_ladder = {8.0, 32.0, 128.0};
    std::vector<double> grid = {0.5, 1.0};
    std::size_t replicates = 1000;
    std::uint64_t seed = 1;
    double safety_multiplier = 6.0;
    double t_burn = 0.0;  // 0: default to the torus side
    int torus_side = 0;   // 0: derived
    std::string out_dir = "out";
    int workers = 1;
    std::size_t n_paths = 1000;          // sample-limit
    std::optional<double> sigma_eq;      // skip estimation when supplied

    std::string canonical_json() const;  // sorted keys, fixed field set
    std::uint64_t hash() const;          // FNV-1a over canonical_json()

    WalkKernel make_kernel() const;
    BranchingRate make_rate() const;
    SimParams make_sim_params() const;   // horizon/grid filled in by callers
    InitLaw init_law() const;

    void validate() const;               // throws ConfigError
};

std::uint64_t fnv1a(const std::string& text);

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig profile_config(const std::string& name);

}  // namespace brwsim
