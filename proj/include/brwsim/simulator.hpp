#pragma once
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "brwsim/branching_rate.hpp"
#include "brwsim/rng.hpp"
#include "brwsim/walk_analytics.hpp"
#include "brwsim/walk_kernel.hpp"

namespace brwsim {

// Finite torus embedding of Z^d: coordinates in [0, side), origin at 0.
struct Torus {
    int dimension = 0;
    int side = 0;  // odd

    std::uint64_t cells() const {
        std::uint64_t c = 1;
        for (int i = 0; i < dimension; ++i) c *= std::uint64_t(side);
        return c;
    }
};

// Sparse occupation counts on the torus.
struct Configuration {
    Torus torus;
    std::unordered_map<std::uint64_t, std::uint32_t> counts;  // linear site -> count, no zeros
    std::uint64_t total = 0;
};

enum class InitKind { Poisson, Burnin };

struct SimParams {
    WalkKernel kernel;
    BranchingRate rate = BranchingRate::independent(1.0);
    double theta = 1.0;
    int torus_side = 0;  // 0: derive from safety rule at validation time
    double safety_multiplier = 6.0;
    double horizon = 1.0;
    std::uint64_t seed = 1;
    InitKind init = InitKind::Poisson;
    double t_burn = 0.0;
    std::vector<double> record_grid;  // sorted, within [0, horizon]
    std::uint64_t event_cap = 100000000;  // events per replicate; RateOverflow beyond
};

// side >= 2 * ceil(m * sqrt(lambda_max(Q) * T)) + 1, forced odd
int derived_torus_side(const CovMatrix& q, double total_time, double safety_multiplier);

// Origin-site event diagnostics, exact (piecewise-constant trajectories).
struct EventCounters {
    std::uint64_t births_at_origin = 0;       // N_t^{0,+}
    std::uint64_t deaths_at_origin = 0;       // N_t^{0,-}
    double integrated_sigma_at_origin = 0.0;  // int_0^t sigma(xi_s(0)) ds
    double integrated_count_at_origin = 0.0;  // int_0^t xi_s(0) ds
};

struct RunResult {
    EventCounters counters;                    // at the horizon
    std::vector<double> occupation_at_grid;    // int_0^{g} xi_s(0) ds per grid time
    std::vector<double> sigma_integral_at_grid;
    std::vector<std::uint32_t> xi0_at_grid;    // xi_g(0) per grid time
    std::uint64_t events = 0;
    Configuration final_config;
};

Configuration init_poisson(const SimParams& params, Rng& rng);
Configuration init_equilibrium(const SimParams& params, Rng& rng);

// Statistically exact event-driven simulation to params.horizon.
// Branch candidates arrive at rate c2 per particle and are thinned with
// probability sigma(k)/(c2 k), which reproduces the target generator exactly.
RunResult run(const SimParams& params, Configuration config, Rng& rng);

struct SigmaEqEstimate {
    double estimate = 0.0;
    double se = 0.0;
    std::size_t replicates = 0;
};

// sigma_theta^eq = E^{Lambda_theta}[sigma(xi(0))], estimated by replicate-
// averaged time averages after burn-in.
SigmaEqEstimate estimate_sigma_eq(const SimParams& params, double t_burn, double t_avg,
                                  std::size_t replicates, std::uint64_t master_seed,
                                  int workers = 1);

} // namespace brwsim
