#include "brwsim/limit_gaussian.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>

#include "brwsim/errors.hpp"
#include "brwsim/quadrature.hpp"

namespace brwsim {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double LimitCovariance::cov(double s, double t) const {
    if (s < 0.0 || t < 0.0) throw DomainError("limit covariance needs s, t >= 0");
    switch (variant) {
        case LimitVariant::FBM34:
            return coefficient * (std::pow(t, 1.5) + std::pow(s, 1.5) -
                                  std::pow(std::abs(t - s), 1.5));
        case LimitVariant::SubFBM34:
            return coefficient * (std::pow(t, 1.5) + std::pow(s, 1.5) -
                                  0.5 * std::pow(std::abs(t - s), 1.5) -
                                  0.5 * std::pow(t + s, 1.5));
        case LimitVariant::BM:
            return coefficient * std::min(s, t);
    }
    throw DomainError("unknown limit variant");
}

std::string LimitCovariance::variant_name() const {
    switch (variant) {
        case LimitVariant::FBM34: return "FBM34";
        case LimitVariant::SubFBM34: return "SubFBM34";
        case LimitVariant::BM: return "BM";
    }
    return "?";
}

LimitCovariance limit_coefficient(WalkAnalytics& analytics, InitLaw init,
                                  double theta, double sigma_eq) {
    const int d = analytics.dimension();
    if (d < 3) throw UnsupportedDimension("occupation-time limit laws need d >= 3");
    if (!(theta > 0.0) || !(sigma_eq > 0.0))
        throw ConfigError("theta and sigma_eq must be positive");

    LimitCovariance law;
    law.dimension = d;
    law.init = init;
    law.theta = theta;
    law.sigma_eq = sigma_eq;
    law.det_q = analytics.Q().det;

    const double inv_sqrt_det = 1.0 / std::sqrt(law.det_q);
    if (d == 3) {
        const double k_eq = std::sqrt(2.0) / (3.0 * std::pow(kPi, 1.5)) *
                            inv_sqrt_det * sigma_eq;
        if (init == InitLaw::Equilibrium) {
            law.variant = LimitVariant::FBM34;
            law.coefficient = k_eq;
        } else {
            law.variant = LimitVariant::SubFBM34;
            law.coefficient = 2.0 * k_eq;
        }
        return law;
    }

    law.variant = LimitVariant::BM;
    if (d == 4) {
        law.coefficient = inv_sqrt_det / (4.0 * kPi * kPi) * sigma_eq;
        return law;
    }

    // d >= 5: D = 2 theta int_0^inf a_u(0,0) du + sigma_eq int_0^inf u a_u(0,0) du.
    Offset zero(std::size_t(d), 0);
    const double t_cut = 200.0;
    double g = analytics.green(zero, 0.0, t_cut).value;
    QuadResult head = integrate_adaptive(
        [&](double u) { return u * analytics.return_probability(u); }, 0.0, t_cut, 1e-9);
    // Tail: u a_u ~ c_d u^{1-d/2}, so int_T^inf ~ c_d T^{2-d/2} * 2/(d-4).
    const double tail = analytics.clt_constant() * 2.0 / (d - 4.0) *
                        std::pow(t_cut, 2.0 - 0.5 * d);
    const double weighted = head.value + tail;
    law.green_integral = g;
    law.weighted_integral = weighted;
    law.coefficient = 2.0 * theta * g + sigma_eq * weighted;
    return law;
}

SampleResult sample_paths(const LimitCovariance& law,
                          const std::vector<double>& times,
                          std::size_t n_paths, std::uint64_t seed) {
    const std::size_t g = times.size();
    if (g == 0) throw GridMismatch("empty sampling grid");
    for (double t : times)
        if (!(t > 0.0)) throw DomainError("sampling grid must be strictly positive");

    Eigen::MatrixXd gram(g, g);
    for (std::size_t i = 0; i < g; ++i)
        for (std::size_t j = 0; j < g; ++j)
            gram(Eigen::Index(i), Eigen::Index(j)) = law.cov(times[i], times[j]);

    double jitter = 0.0;
    Eigen::LLT<Eigen::MatrixXd> llt;
    for (;;) {
        Eigen::MatrixXd m = gram;
        if (jitter > 0.0)
            m.diagonal().array() += jitter * gram.diagonal().maxCoeff();
        llt.compute(m);
        if (llt.info() == Eigen::Success) break;
        jitter = (jitter == 0.0) ? 1e-14 : jitter * 100.0;
        if (jitter > 1e-10)
            throw NotPSD("limit Gram matrix not positive definite within jitter cap");
    }
    Eigen::MatrixXd l = llt.matrixL();

    SampleResult out;
    out.times = times;
    out.jitter_used = jitter;
    out.paths.assign(n_paths, std::vector<double>(g, 0.0));
    Rng rng(seed, 0);
    Eigen::VectorXd z(g);
    for (std::size_t p = 0; p < n_paths; ++p) {
        for (std::size_t i = 0; i < g; ++i) z(Eigen::Index(i)) = rng.normal();
        Eigen::VectorXd x = l * z;
        for (std::size_t i = 0; i < g; ++i) out.paths[p][i] = x(Eigen::Index(i));
    }
    return out;
}

double subfbm_representation_check(const LimitCovariance& law,
                                   const std::vector<double>& grid) {
    if (law.variant != LimitVariant::SubFBM34)
        throw DomainError("representation check applies to SubFBM34 only");
    // Two-sided fBM(3/4) covariance c(a,b) = (C/2)(|a|^{3/2}+|b|^{3/2}-|a-b|^{3/2}),
    // with C chosen so that (B_t + B_{-t})/sqrt(2) has variance law.cov(t,t):
    // Var = 2 t^{3/2} C - sqrt(2)/... matching FBM34 on the positive axis means
    // c(s,t) = K_fbm (s^{3/2}+t^{3/2}-|s-t|^{3/2})/1 with K_fbm = law.coefficient / 2
    // per axis of the two-sided process.
    const double c = law.coefficient;
    auto fbm2 = [&](double a, double b) {
        return 0.5 * c * (std::pow(std::abs(a), 1.5) + std::pow(std::abs(b), 1.5) -
                          std::pow(std::abs(a - b), 1.5));
    };
    double worst = 0.0;
    for (double s : grid)
        for (double t : grid) {
            if (!(s > 0.0) || !(t > 0.0)) throw DomainError("grid must be positive");
            double rhs = 0.5 * (fbm2(s, t) + fbm2(-s, -t) + fbm2(s, -t) + fbm2(-s, t));
            worst = std::max(worst, std::abs(law.cov(s, t) - rhs));
        }
    return worst;
}

}  // namespace brwsim
