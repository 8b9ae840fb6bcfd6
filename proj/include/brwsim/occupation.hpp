#pragma once

#include <cstdint>
#include <vector>

#include "brwsim/moments.hpp"
#include "brwsim/simulator.hpp"
#include "brwsim/walk_analytics.hpp"

namespace brwsim {

// One renormalized occupation-time path:
//   X^N_t = ( int_0^{Nt} (xi_s(0) - theta) ds ) / h_d(N),
// sampled on a fixed renormalized time grid.  times[0] == 0 and
// values[0] == 0 always hold by construction.
struct OccupationPath {
    double scale_n = 0.0;               // the N in X^N
    std::vector<double> times;          // renormalized, starts at 0
    std::vector<double> values;
};

// Map a raw occupation integral, sampled at absolute times N * times[j],
// to the renormalized path.
OccupationPath renormalize(const std::vector<double>& times,
                           const std::vector<double>& occupation,
                           double scale_n, double theta, int dimension);

struct EnsembleSpec {
    SimParams base;                 // horizon and record_grid are derived here
    double scale_n = 1.0;
    std::vector<double> times;      // renormalized grid, strictly increasing, > 0
    std::size_t replicates = 0;
    std::uint64_t master_seed = 1;
    int workers = 1;
};

struct Ensemble {
    double scale_n = 0.0;
    std::vector<double> times;              // with leading 0
    std::vector<OccupationPath> paths;      // completed replicates
    std::size_t attempted = 0;
    std::size_t excluded = 0;               // replicates lost to the event cap
};

// Replicate-parallel ensemble of renormalized paths.  Replicate i always
// uses RNG stream i of the master seed, independent of scheduling, so runs
// are reproducible at any worker count.
Ensemble build_ensemble(const EnsembleSpec& spec);

struct EnsembleSummary {
    double scale_n = 0.0;
    std::vector<double> times;
    std::vector<double> mean;               // per grid point
    std::vector<double> mean_se;
    std::vector<std::vector<double>> cov;   // sample covariance
    std::vector<std::vector<double>> cov_se;  // delete-one jackknife
    std::vector<double> fourth_central;     // per grid point
    std::size_t replicates = 0;
    double excluded_fraction = 0.0;
    bool valid = false;                     // false once exclusions exceed 1%
};

EnsembleSummary summarize(const Ensemble& ensemble);

// Exact prelimit covariance Cov(X^N_s, X^N_t) from the second-moment
// formulas, reduced to one-dimensional integrals against the cached
// cumulative transition tables.
double exact_prelimit_cov(WalkAnalytics& analytics, const MomentModel& model,
                          InitLaw init, double scale_n, double s, double t,
                          double tol = 1e-8);

// Direct two-dimensional Simpson evaluation of the same double integral.
// Slower, but works for state-dependent branching with a supplied sigma
// curve, and doubles as an independent cross-check of the reductions.
double prelimit_cov_quadrature(WalkAnalytics& analytics, const MomentModel& model,
                               InitLaw init, double scale_n, double s, double t,
                               int panels = 64);

}  // namespace brwsim
