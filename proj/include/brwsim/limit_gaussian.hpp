#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "brwsim/rng.hpp"
#include "brwsim/walk_analytics.hpp"

namespace brwsim {

enum class LimitVariant { FBM34, SubFBM34, BM };

// Closed-form Gaussian limit law of the renormalized occupation time,
// together with the inputs it was built from.
struct LimitCovariance {
    LimitVariant variant = LimitVariant::BM;
    double coefficient = 0.0;  // K for the fractional variants, D for BM

    // provenance
    int dimension = 0;
    InitLaw init = InitLaw::Equilibrium;
    double theta = 0.0;
    double sigma_eq = 0.0;
    double det_q = 0.0;
    std::optional<double> green_integral;       // int a_u(0,0) du, d >= 5
    std::optional<double> weighted_integral;    // int u a_u(0,0) du, d >= 5

    double cov(double s, double t) const;
    std::string variant_name() const;
};

// Build the limit law for the given dimension and initial condition.
// d = 3: fBM(3/4) for equilibrium, sub-fBM(3/4) for Poisson start.
// d = 4 and d >= 5: Brownian motion with the dimension-specific diffusion
// constant; the d >= 5 walk integrals are evaluated from analytics.
LimitCovariance limit_coefficient(WalkAnalytics& analytics, InitLaw init,
                                  double theta, double sigma_eq);

struct SampleResult {
    std::vector<double> times;
    std::vector<std::vector<double>> paths;  // n_paths rows
    double jitter_used = 0.0;
};

// Exact zero-mean Gaussian sampling on a grid via Cholesky factorization,
// with a small reported diagonal jitter if the Gram matrix is borderline.
SampleResult sample_paths(const LimitCovariance& law,
                          const std::vector<double>& times,
                          std::size_t n_paths, std::uint64_t seed);

// Max abs discrepancy, over the grid, between the SubFBM34 covariance and
// its two-sided fBM(3/4) assembly (B_t + B_{-t})/sqrt(2), with the fBM
// normalization fixed by matching FBM34 on the positive axis.
double subfbm_representation_check(const LimitCovariance& law,
                                   const std::vector<double>& grid);

}  // namespace brwsim
