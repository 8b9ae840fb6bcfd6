#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "brwsim/moments.hpp"
#include "brwsim/quadrature.hpp"

using namespace brwsim;

TEST_CASE("sigma curve interpolation") {
    SigmaCurve curve({0.0, 1.0, 3.0}, {0.0, 2.0, 4.0});
    CHECK(curve(0.0) == 0.0);
    CHECK(curve(0.5) == doctest::Approx(1.0));
    CHECK(curve(2.0) == doctest::Approx(3.0));
    CHECK(curve(10.0) == doctest::Approx(4.0));  // constant beyond the last knot
    CHECK_THROWS_AS(SigmaCurve({1.0, 2.0}, {0.0, 1.0}), ConfigError);  // must start at 0
    CHECK_THROWS_AS(SigmaCurve({0.0, 0.0}, {0.0, 1.0}), ConfigError);  // not increasing
    CHECK_THROWS_AS(SigmaCurve({0.0, 1.0}, {0.0, -1.0}), ConfigError); // negative value
}

TEST_CASE("moment model plumbing") {
    MomentModel m = MomentModel::independent(2.0, 0.5);
    CHECK(m.expected_sigma(3.7, InitLaw::Poisson) == doctest::Approx(1.0));
    CHECK(m.equilibrium_sigma() == doctest::Approx(1.0));
    CHECK_THROWS_AS(MomentModel::independent(0.0, 1.0), ConfigError);

    MomentModel t;  // state-dependent without curves
    t.theta = 1.0;
    CHECK_THROWS_AS(t.expected_sigma(1.0, InitLaw::Poisson), MissingSigmaCurve);
    CHECK_THROWS_AS(t.equilibrium_sigma(), MissingSigmaCurve);
    t.sigma_eq = 0.8;
    CHECK(t.expected_sigma(1.0, InitLaw::Equilibrium) == doctest::Approx(0.8));
}

TEST_CASE("poisson-start covariance at the origin: frozen oracle") {
    // d=3 SRW, Independent(rho=1), theta=1:
    // Cov(xi_1(0), xi_2(0)) = a_1(0,0) + (1/2)(U(3) - U(1)) = 0.6070502845
    WalkAnalytics an(srw_kernel(3));
    MomentModel m = MomentModel::independent(1.0, 1.0);
    double c = moment_formula_cov_origin(an, m, InitLaw::Poisson, 1.0, 2.0);
    CHECK(c == doctest::Approx(0.6070502845).epsilon(2e-6));
}

TEST_CASE("equilibrium variance matches theta + sigma_eq g / 2") {
    WalkAnalytics an(srw_kernel(3));
    MomentModel m = MomentModel::independent(1.0, 1.0);
    // Var_eq(xi(0)) = theta * a_0 + (sigma_eq/2) * g(0,0) = 1 + g/2
    double v = moment_formula_cov_origin(an, m, InitLaw::Equilibrium, 5.0, 5.0);
    CHECK(v == doctest::Approx(1.7581930296).epsilon(2e-5));
    // stationarity: depends only on v - u
    double c1 = moment_formula_cov_origin(an, m, InitLaw::Equilibrium, 1.0, 2.5);
    double c2 = moment_formula_cov_origin(an, m, InitLaw::Equilibrium, 4.0, 5.5);
    CHECK(c1 == doctest::Approx(c2).epsilon(1e-9));
}

TEST_CASE("poisson start converges to the equilibrium covariance") {
    WalkAnalytics an(srw_kernel(3));
    MomentModel m = MomentModel::independent(1.0, 1.0);
    const double lag = 1.0;
    double eq = moment_formula_cov_origin(an, m, InitLaw::Equilibrium, 0.0, lag);
    double p_small = moment_formula_cov_origin(an, m, InitLaw::Poisson, 1.0, 1.0 + lag);
    double p_large = moment_formula_cov_origin(an, m, InitLaw::Poisson, 60.0, 60.0 + lag);
    CHECK(std::abs(p_large - eq) < std::abs(p_small - eq));
    // remaining gap is (1/2) int_{2u+lag}^inf a_r dr ~ 0.03 at u = 60
    CHECK(p_large == doctest::Approx(eq).epsilon(0.05));
}

TEST_CASE("u = 0 and off-origin covariances reduce to the transition kernel") {
    WalkAnalytics an(srw_kernel(3));
    MomentModel m = MomentModel::independent(1.0, 1.0);
    Offset zero{0, 0, 0}, x{1, 1, 0};
    // no branching has acted yet at u = 0
    double c = moment_formula_cov(an, m, InitLaw::Poisson, 0.0, 1.5, zero, x);
    CHECK(c == doctest::Approx(an.transition_spectral(1.5, x)).epsilon(1e-9));
    // translation invariance
    Offset y{-1, 0, 2}, y2{0, 1, 2};
    double c1 = moment_formula_cov(an, m, InitLaw::Poisson, 1.0, 2.0, y, y2);
    double c2 = moment_formula_cov(an, m, InitLaw::Poisson, 1.0, 2.0, zero, Offset{1, 1, 0});
    CHECK(c1 == doctest::Approx(c2).epsilon(1e-7));
}

TEST_CASE("independent-branching shortcut agrees with the generic integral") {
    WalkAnalytics an(srw_kernel(3));
    MomentModel ind = MomentModel::independent(1.0, 1.0);
    // same law expressed as a tabulated model with a constant sigma curve
    MomentModel tab;
    tab.theta = 1.0;
    tab.sigma_curve = SigmaCurve({0.0, 1.0}, {1.0, 1.0});
    tab.sigma_eq = 1.0;
    for (auto [u, v] : {std::pair{1.0, 2.0}, {0.5, 0.5}, {2.0, 5.0}}) {
        double a = moment_formula_cov_origin(an, ind, InitLaw::Poisson, u, v);
        double b = moment_formula_cov_origin(an, tab, InitLaw::Poisson, u, v);
        CHECK(a == doctest::Approx(b).epsilon(1e-6));
    }
}

TEST_CASE("state-dependent poisson start without a sigma curve is refused") {
    WalkAnalytics an(srw_kernel(3));
    MomentModel m;
    m.theta = 1.0;
    m.sigma_eq = 1.0;
    CHECK_THROWS_AS(moment_formula_cov_origin(an, m, InitLaw::Poisson, 1.0, 2.0),
                    MissingSigmaCurve);
    CHECK(moment_formula_cov_origin(an, m, InitLaw::Equilibrium, 1.0, 2.0) > 0.0);
}

TEST_CASE("argument validation") {
    WalkAnalytics an(srw_kernel(3));
    MomentModel m = MomentModel::independent(1.0, 1.0);
    Offset zero{0, 0, 0};
    CHECK_THROWS_AS(moment_formula_cov(an, m, InitLaw::Poisson, 2.0, 1.0, zero, zero),
                    DomainError);
    CHECK_THROWS_AS(moment_formula_cov(an, m, InitLaw::Poisson, 1.0, 2.0, Offset{0, 0}, Offset{0, 0}),
                    DomainError);
}
