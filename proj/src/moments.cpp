#include "brwsim/moments.hpp"

#include <algorithm>
#include <cmath>

#include "brwsim/quadrature.hpp"

namespace brwsim {

SigmaCurve::SigmaCurve(std::vector<double> t, std::vector<double> v)
    : times(std::move(t)), values(std::move(v)) {
    if (times.size() != values.size() || times.size() < 2)
        throw ConfigError("sigma curve needs at least two matching knots");
    for (std::size_t i = 0; i + 1 < times.size(); ++i)
        if (!(times[i] < times[i + 1]))
            throw ConfigError("sigma curve times must be strictly increasing");
    for (double v0 : values)
        if (!(v0 >= 0.0) || !std::isfinite(v0))
            throw ConfigError("sigma curve values must be finite and nonnegative");
    if (times.front() > 0.0) throw ConfigError("sigma curve must start at t = 0");
}

double SigmaCurve::operator()(double t) const {
    if (empty()) throw MissingSigmaCurve("sigma curve is empty");
    if (t <= times.front()) return values.front();
    if (t >= times.back()) return values.back();
    auto it = std::upper_bound(times.begin(), times.end(), t);
    std::size_t i = std::size_t(it - times.begin());
    double w = (t - times[i - 1]) / (times[i] - times[i - 1]);
    return values[i - 1] + w * (values[i] - values[i - 1]);
}

MomentModel MomentModel::independent(double theta, double rho) {
    if (!(theta > 0.0)) throw ConfigError("theta must be positive");
    if (!(rho > 0.0)) throw ConfigError("rho must be positive");
    MomentModel m;
    m.theta = theta;
    m.rho = rho;
    m.sigma_eq = rho * theta;
    return m;
}

double MomentModel::expected_sigma(double u, InitLaw init) const {
    // Independent branching: E sigma(xi_u(0)) = rho * E xi_u(0) = rho * theta
    // under both initial laws (the mean field is stationary at theta).
    if (rho) return *rho * theta;
    if (init == InitLaw::Equilibrium) return equilibrium_sigma();
    if (!sigma_curve || sigma_curve->empty())
        throw MissingSigmaCurve(
            "state-dependent branching from a Poisson start requires a "
            "tabulated E sigma(xi_t(0)) curve");
    return (*sigma_curve)(u);
}

double MomentModel::equilibrium_sigma() const {
    if (rho) return *rho * theta;
    if (!sigma_eq)
        throw MissingSigmaCurve(
            "state-dependent branching requires an estimated equilibrium "
            "mean of sigma");
    return *sigma_eq;
}

namespace {

bool is_origin(const Offset& z) {
    return std::all_of(z.begin(), z.end(), [](int c) { return c == 0; });
}

Offset displacement(const Offset& x, const Offset& y) {
    if (x.size() != y.size()) throw DomainError("offset dimensions differ");
    Offset z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = y[i] - x[i];
    return z;
}

}  // namespace

double moment_formula_cov(WalkAnalytics& analytics, const MomentModel& model,
                          InitLaw init, double u, double v,
                          const Offset& x, const Offset& y, double tol) {
    if (u < 0.0 || v < u) throw DomainError("need 0 <= u <= v");
    if (int(x.size()) != analytics.dimension())
        throw DomainError("offset dimension mismatch");
    Offset z = displacement(x, y);
    const bool origin = is_origin(z);

    auto a = [&](double t) {
        if (!origin) return analytics.transition_spectral(t, z);
        // prefer the cached cumulative tables when they already cover t
        if (analytics.table_t_max() > 0.0 && t <= analytics.table_t_max())
            return analytics.a00(t);
        return analytics.return_probability(t);
    };

    double result = model.theta * a(v - u);

    if (init == InitLaw::Equilibrium) {
        // theta * a_{v-u} + (sigma_eq / 2) * int_{v-u}^inf a_r dr
        double seq = model.equilibrium_sigma();
        double tail;
        if (origin) {
            analytics.ensure_tables(std::max(v - u, 1.0));
            tail = analytics.green0().value - analytics.U0(v - u);
        } else {
            double head = (v - u > 0.0)
                              ? integrate_adaptive(a, 0.0, v - u, tol).value
                              : 0.0;
            tail = analytics.green(z, 0.0).value - head;
        }
        return result + 0.5 * seq * tail;
    }

    // Poisson start: theta * a_{v-u} + int_0^u a_{v-u+2r} E sigma(xi_{u-r}(0)) dr.
    if (u == 0.0) return result;
    if (model.rho && origin) {
        // Constant E sigma = rho * theta; substitute s = v - u + 2r to get
        // (rho theta / 2) (U(v + u) - U(v - u)) from the cached cumulative table.
        analytics.ensure_tables(v + u);
        result += 0.5 * (*model.rho) * model.theta *
                  (analytics.U0(v + u) - analytics.U0(v - u));
        return result;
    }
    auto integrand = [&](double r) {
        return a(v - u + 2.0 * r) * model.expected_sigma(u - r, init);
    };
    result += integrate_adaptive(integrand, 0.0, u, tol).value;
    return result;
}

double moment_formula_cov_origin(WalkAnalytics& analytics, const MomentModel& model,
                                 InitLaw init, double u, double v, double tol) {
    Offset zero(std::size_t(analytics.dimension()), 0);
    return moment_formula_cov(analytics, model, init, u, v, zero, zero, tol);
}

}  // namespace brwsim
