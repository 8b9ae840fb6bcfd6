#pragma once

#include <optional>
#include <vector>

#include "brwsim/branching_rate.hpp"
#include "brwsim/errors.hpp"
#include "brwsim/walk_analytics.hpp"

namespace brwsim {

// Time curve of E[sigma(xi_t(0))], needed by the second-moment formula when
// the branching rate is state dependent and the start is out of equilibrium.
// Piecewise-linear interpolation on a user-supplied grid; constant beyond
// the last knot.
struct SigmaCurve {
    std::vector<double> times;
    std::vector<double> values;

    SigmaCurve() = default;
    SigmaCurve(std::vector<double> t, std::vector<double> v);

    double operator()(double t) const;
    bool empty() const { return times.empty(); }
};

// Everything the exact covariance formula needs to know about the model
// besides the walk itself.
struct MomentModel {
    double theta = 1.0;
    std::optional<double> rho;            // set for independent branching
    std::optional<SigmaCurve> sigma_curve; // E sigma(xi_t(0)) out of equilibrium
    std::optional<double> sigma_eq;       // E_eq sigma(xi(0))

    static MomentModel independent(double theta, double rho);

    // Value of E sigma(xi_u(0)) under the given initial law.
    double expected_sigma(double u, InitLaw init) const;
    double equilibrium_sigma() const;
};

// Exact covariance Cov(xi_u(x), xi_v(y)) for 0 <= u <= v, transient walk.
// Poisson start uses the time-inhomogeneous branching integral; equilibrium
// start uses the stationary tail formula.
double moment_formula_cov(WalkAnalytics& analytics, const MomentModel& model,
                          InitLaw init, double u, double v,
                          const Offset& x, const Offset& y,
                          double tol = 1e-9);

// Convenience overload at the origin.
double moment_formula_cov_origin(WalkAnalytics& analytics, const MomentModel& model,
                                 InitLaw init, double u, double v,
                                 double tol = 1e-9);

}  // namespace brwsim
