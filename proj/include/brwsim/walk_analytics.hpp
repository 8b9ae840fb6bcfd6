#pragma once
#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "brwsim/quadrature.hpp"
#include "brwsim/walk_kernel.hpp"

namespace brwsim {

enum class InitLaw { Poisson, Equilibrium };

// Dense a_t(0, .) field on the truncation box produced by uniformization.
struct TransitionField {
    int dimension = 0;
    int radius = 0;                // box is [-radius, radius]^d
    std::vector<double> data;      // row-major over (x_1 + r) * S^{d-1} + ...
    double tail_mass = 0.0;        // Poisson mass beyond the truncation step

    double at(const Offset& x) const;
};

// Exact numerical random-walk quantities: transition probabilities,
// Gaussian local-CLT approximant, Green function / resolvent / killed Green
// function, norming h_d and the per-clan occupation contribution.
//
// Two independent evaluation routes for a_t are kept side by side:
//   - uniformization (Poisson mixture of discrete convolution powers),
//     exact up to a reported truncation tail, practical for moderate t;
//   - the lattice Fourier representation evaluated as a torus spectral sum,
//     whose aliasing error is driven below 1e-13 by the grid-size choice,
//     practical for all t and used inside quadratures.
// Tests cross-check the two routes against each other.
class WalkAnalytics {
public:
    explicit WalkAnalytics(WalkKernel kernel);

    const WalkKernel& kernel() const { return kernel_; }
    const CovMatrix& Q() const { return q_; }
    int dimension() const { return kernel_.dimension; }

    // (2 pi)^{-d/2} (det Q)^{-1/2}, the local-CLT constant
    double clt_constant() const { return c_d_; }

    // a_t(0, x) by uniformization, truncated when the Poisson tail drops
    // below tol. Throws ToleranceNotReached when the step cap or the
    // truncation-ball memory budget is exceeded.
    double transition_probability(double t, const Offset& x, double tol = 1e-12) const;
    TransitionField transition_field(double t, double tol = 1e-12) const;

    // a_t(0, x) via the spectral representation
    double transition_spectral(double t, const Offset& x) const;
    // a_t(0, 0), spectral route with memoization
    double return_probability(double t) const;

    // p_t(0, x) = (2 pi t)^{-d/2} (det Q)^{-1/2} exp(-x^T Q^{-1} x / 2t)
    double gaussian_approx(double t, const std::vector<double>& x) const;

    // h_d(t): t^{3/4} (d=3), sqrt(t ln t) (d=4, t>1), sqrt(t) (d>=5)
    static double norming(int d, double t);

    // g_lambda(x,0) (lambda > 0) or g(x,0) (lambda = 0, d >= 3):
    // quadrature on [0, t_cut] plus a local-CLT tail with a 1.05 safety
    // factor folded into the reported error bound.
    QuadResult green(const Offset& x, double lambda, double t_cut = 400.0,
                     double tol = 1e-9) const;

    // u_t(x, 0) = int_0^t a_s(x, 0) ds
    QuadResult killed_green(const Offset& x, double t, double tol = 1e-9) const;

    // Expected occupation contribution per clan up to horizon T.
    QuadResult clan_contribution(double T, InitLaw init, double tol = 1e-9) const;

    // Cumulative a_t(0,0) tables, built lazily up to t_max:
    //   U0(t) = int_0^t a_r(0,0) dr,  V0 = int_0^t U0,  W0 = int_0^t V0.
    void ensure_tables(double t_max) const;
    double table_t_max() const;
    double a00(double t) const;  // table-interpolated a_t(0,0)
    double U0(double t) const;
    double V0(double t) const;
    double W0(double t) const;

    // g(0,0) with its error bound (d >= 3)
    QuadResult green0() const;

private:
    struct AxisLaw {
        std::vector<std::pair<int, double>> jumps;  // (offset, prob), offset != 0
        double mass = 0.0;                          // total probability on this axis
        double second_moment = 0.0;
    };

    double spectral_axis_factor(const AxisLaw& axis, double t, int x) const;
    double spectral_full_grid(double t, const Offset& x) const;
    int spectral_grid_size(double second_moment, double t, int range, int x) const;

    WalkKernel kernel_;
    CovMatrix q_;
    double c_d_ = 0.0;
    bool axis_decomposable_ = false;
    std::vector<AxisLaw> axes_;

    mutable std::mutex mutex_;
    mutable std::unordered_map<double, double> return_prob_cache_;
    mutable CumulativeTable u_table_, v_table_, w_table_;
    mutable QuadResult green0_;
    mutable bool green0_valid_ = false;
};

} // namespace brwsim
