#include "brwsim/occupation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "brwsim/errors.hpp"
#include "brwsim/quadrature.hpp"

namespace brwsim {

OccupationPath renormalize(const std::vector<double>& times,
                           const std::vector<double>& occupation,
                           double scale_n, double theta, int dimension) {
    if (times.size() != occupation.size())
        throw GridMismatch("occupation samples do not match the time grid");
    if (times.empty()) throw GridMismatch("empty time grid");
    if (!(scale_n > 0.0)) throw DomainError("scale N must be positive");
    double prev = 0.0;
    for (double t : times) {
        if (!(t > prev)) throw GridMismatch("grid times must be strictly increasing and positive");
        prev = t;
    }
    const double h = WalkAnalytics::norming(dimension, scale_n);
    OccupationPath path;
    path.scale_n = scale_n;
    path.times.reserve(times.size() + 1);
    path.values.reserve(times.size() + 1);
    path.times.push_back(0.0);
    path.values.push_back(0.0);
    for (std::size_t j = 0; j < times.size(); ++j) {
        path.times.push_back(times[j]);
        path.values.push_back((occupation[j] - theta * scale_n * times[j]) / h);
    }
    return path;
}

Ensemble build_ensemble(const EnsembleSpec& spec) {
    if (spec.replicates == 0) throw TooFewReplicates("need at least one replicate");
    if (spec.times.empty()) throw GridMismatch("empty renormalized grid");

    SimParams params = spec.base;
    params.horizon = spec.scale_n * spec.times.back();
    params.record_grid.clear();
    for (double t : spec.times) params.record_grid.push_back(spec.scale_n * t);
    if (params.torus_side == 0) {
        CovMatrix q = covariance_matrix(params.kernel);
        params.torus_side =
            derived_torus_side(q, params.horizon, params.safety_multiplier);
    }
    if (params.init == InitKind::Burnin && params.t_burn <= 0.0)
        params.t_burn = double(params.torus_side);

    Ensemble ens;
    ens.scale_n = spec.scale_n;
    ens.times.push_back(0.0);
    ens.times.insert(ens.times.end(), spec.times.begin(), spec.times.end());
    ens.attempted = spec.replicates;
    ens.paths.resize(spec.replicates);

    std::vector<char> ok(spec.replicates, 0);
    std::atomic<std::size_t> next{0};
    const int workers = std::max(1, spec.workers);

    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= spec.replicates) return;
            Rng rng(spec.master_seed, std::uint64_t(i));
            try {
                Configuration cfg = params.init == InitKind::Burnin
                                        ? init_equilibrium(params, rng)
                                        : init_poisson(params, rng);
                RunResult r = run(params, std::move(cfg), rng);
                ens.paths[i] = renormalize(spec.times, r.occupation_at_grid,
                                           spec.scale_n, params.theta,
                                           params.kernel.dimension);
                ok[i] = 1;
            } catch (const RateOverflow&) {
                ok[i] = 0;  // replicate exceeded the event cap; excluded below
            }
        }
    };

    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    std::vector<OccupationPath> kept;
    kept.reserve(spec.replicates);
    for (std::size_t i = 0; i < spec.replicates; ++i)
        if (ok[i]) kept.push_back(std::move(ens.paths[i]));
    ens.excluded = spec.replicates - kept.size();
    ens.paths = std::move(kept);
    return ens;
}

EnsembleSummary summarize(const Ensemble& ensemble) {
    const std::size_t r = ensemble.paths.size();
    if (r < 3) throw TooFewReplicates("summary needs at least three completed replicates");
    const std::size_t g = ensemble.times.size();
    for (const auto& p : ensemble.paths)
        if (p.times.size() != g)
            throw GridMismatch("replicate grid does not match the ensemble grid");

    EnsembleSummary s;
    s.scale_n = ensemble.scale_n;
    s.times = ensemble.times;
    s.replicates = r;
    s.excluded_fraction = ensemble.attempted == 0
                              ? 0.0
                              : double(ensemble.excluded) / double(ensemble.attempted);
    s.valid = s.excluded_fraction <= 0.01;

    std::vector<double> sum(g, 0.0);
    std::vector<std::vector<double>> cross(g, std::vector<double>(g, 0.0));
    for (const auto& p : ensemble.paths)
        for (std::size_t j = 0; j < g; ++j) {
            sum[j] += p.values[j];
            for (std::size_t k = j; k < g; ++k) cross[j][k] += p.values[j] * p.values[k];
        }

    s.mean.assign(g, 0.0);
    s.cov.assign(g, std::vector<double>(g, 0.0));
    for (std::size_t j = 0; j < g; ++j) s.mean[j] = sum[j] / double(r);
    for (std::size_t j = 0; j < g; ++j)
        for (std::size_t k = j; k < g; ++k) {
            double c = (cross[j][k] - double(r) * s.mean[j] * s.mean[k]) / double(r - 1);
            s.cov[j][k] = s.cov[k][j] = c;
        }

    s.mean_se.assign(g, 0.0);
    for (std::size_t j = 0; j < g; ++j)
        s.mean_se[j] = std::sqrt(std::max(0.0, s.cov[j][j]) / double(r));

    s.fourth_central.assign(g, 0.0);
    for (const auto& p : ensemble.paths)
        for (std::size_t j = 0; j < g; ++j) {
            double d = p.values[j] - s.mean[j];
            s.fourth_central[j] += d * d * d * d;
        }
    for (std::size_t j = 0; j < g; ++j) s.fourth_central[j] /= double(r);

    // Delete-one jackknife on each covariance entry.
    s.cov_se.assign(g, std::vector<double>(g, 0.0));
    std::vector<std::vector<double>> jk_sum(g, std::vector<double>(g, 0.0));
    std::vector<std::vector<double>> jk_sq(g, std::vector<double>(g, 0.0));
    for (const auto& p : ensemble.paths) {
        for (std::size_t j = 0; j < g; ++j) {
            double mj = (sum[j] - p.values[j]) / double(r - 1);
            for (std::size_t k = j; k < g; ++k) {
                double mk = (sum[k] - p.values[k]) / double(r - 1);
                double cr = cross[j][k] - p.values[j] * p.values[k];
                double c = (cr - double(r - 1) * mj * mk) / double(r - 2);
                jk_sum[j][k] += c;
                jk_sq[j][k] += c * c;
            }
        }
    }
    for (std::size_t j = 0; j < g; ++j)
        for (std::size_t k = j; k < g; ++k) {
            double mean_jk = jk_sum[j][k] / double(r);
            double var_jk = (jk_sq[j][k] / double(r)) - mean_jk * mean_jk;
            double se = std::sqrt(std::max(0.0, var_jk) * double(r - 1));
            s.cov_se[j][k] = s.cov_se[k][j] = se;
        }
    return s;
}

namespace {

// Length of the level set {(u,v) in [0,A]x[0,B] : |u - v| = w}, A <= B.
double overlap_length(double w, double a, double b) {
    double fwd = std::min(a, b - w);
    double bwd = a - w;
    return std::max(0.0, fwd) + std::max(0.0, bwd);
}

}  // namespace

double exact_prelimit_cov(WalkAnalytics& analytics, const MomentModel& model,
                          InitLaw init, double scale_n, double s, double t,
                          double tol) {
    if (!(s > 0.0) || !(t > 0.0)) throw DomainError("need s, t > 0");
    if (!(scale_n > 0.0)) throw DomainError("scale N must be positive");
    const double a = scale_n * std::min(s, t);
    const double b = scale_n * std::max(s, t);
    const double h = WalkAnalytics::norming(analytics.dimension(), scale_n);
    const double h2 = h * h;

    if (init == InitLaw::Poisson && !model.rho)
        return prelimit_cov_quadrature(analytics, model, init, scale_n, s, t);

    analytics.ensure_tables(a + b);

    auto piecewise = [&](auto&& f) {
        double total = 0.0;
        double cuts[4] = {0.0, std::min(b - a, a), std::max(b - a, a), b};
        for (int i = 0; i < 3; ++i)
            if (cuts[i + 1] > cuts[i] + 1e-15)
                total += integrate_adaptive(f, cuts[i], cuts[i + 1], tol / 3.0).value;
        return total;
    };

    double term1 = model.theta * piecewise([&](double w) {
        return analytics.a00(w) * overlap_length(w, a, b);
    });

    double term2;
    if (init == InitLaw::Equilibrium) {
        const double seq = model.equilibrium_sigma();
        const double g = analytics.green0().value;
        term2 = 0.5 * seq * piecewise([&](double w) {
            return (g - analytics.U0(w)) * overlap_length(w, a, b);
        });
    } else {
        // Poisson start, independent branching: triple cumulative W of a.
        const double c = 0.5 * (*model.rho) * model.theta;
        term2 = c * (analytics.W0(a + b) + analytics.W0(b - a) -
                     2.0 * analytics.W0(a) - 2.0 * analytics.W0(b));
    }
    return (term1 + term2) / h2;
}

double prelimit_cov_quadrature(WalkAnalytics& analytics, const MomentModel& model,
                               InitLaw init, double scale_n, double s, double t,
                               int panels) {
    if (!(s > 0.0) || !(t > 0.0)) throw DomainError("need s, t > 0");
    if (panels < 2 || panels % 2 != 0) throw DomainError("panel count must be even and >= 2");
    const double a = scale_n * std::min(s, t);
    const double b = scale_n * std::max(s, t);
    const double h = WalkAnalytics::norming(analytics.dimension(), scale_n);
    analytics.ensure_tables(a + b);

    auto cov_uv = [&](double u, double v) {
        return moment_formula_cov_origin(analytics, model, init,
                                         std::min(u, v), std::max(u, v), 1e-9);
    };

    const int n = panels;
    const double hu = a / n;
    const double hv = b / n;
    auto wgt = [&](int i) { return (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0); };
    double total = 0.0;
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j)
            total += wgt(i) * wgt(j) * cov_uv(i * hu, j * hv);
    total *= hu * hv / 9.0;
    return total / (h * h);
}

}  // namespace brwsim
