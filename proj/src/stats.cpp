#include "brwsim/stats.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "brwsim/errors.hpp"

namespace brwsim {

using nlohmann::json;

ComparisonReport compare(const EnsembleSummary& summary,
                         const std::vector<std::vector<double>>& reference,
                         const std::string& target, double gate, double se_floor) {
    const std::size_t g = summary.times.size();
    if (reference.size() != g)
        throw GridMismatch("reference matrix does not match the summary grid");
    for (const auto& row : reference)
        if (row.size() != g) throw GridMismatch("reference matrix is not square");

    ComparisonReport r;
    r.target = target;
    r.times = summary.times;
    r.estimated = summary.cov;
    r.reference = reference;
    r.gate = gate;
    r.scale_n = summary.scale_n;
    r.replicates = summary.replicates;
    r.z.assign(g, std::vector<double>(g, 0.0));
    for (std::size_t j = 0; j < g; ++j)
        for (std::size_t k = 0; k < g; ++k) {
            double se = summary.cov_se[j][k];
            double diff = summary.cov[j][k] - reference[j][k];
            double z;
            if (se > se_floor) {
                z = diff / se;
            } else {
                // degenerate entry (e.g. the t = 0 anchor): exact match required
                z = (diff == 0.0) ? 0.0 : std::copysign(1e6, diff);
            }
            if (!std::isfinite(z)) throw DataIntegrityError("non-finite z-score");
            r.z[j][k] = z;
            r.max_abs_z = std::max(r.max_abs_z, std::abs(z));
        }
    r.pass = r.max_abs_z <= gate;
    return r;
}

namespace {

struct MomentStats {
    double skew = 0.0;
    double exkurt = 0.0;
    bool ok = false;
};

// Skewness and excess kurtosis from raw power sums over n points.
MomentStats moments_from_sums(double p1, double p2, double p3, double p4,
                              double n, double skip_var_below) {
    double m = p1 / n;
    double m2 = p2 / n - m * m;
    double m3 = p3 / n - 3.0 * m * (p2 / n) + 2.0 * m * m * m;
    double m4 = p4 / n - 4.0 * m * (p3 / n) + 6.0 * m * m * (p2 / n) - 3.0 * m * m * m * m;
    MomentStats s;
    if (m2 <= skip_var_below) return s;
    s.skew = m3 / std::pow(m2, 1.5);
    s.exkurt = m4 / (m2 * m2) - 3.0;
    s.ok = true;
    return s;
}

}  // namespace

std::vector<GaussianityPoint> gaussianity(const Ensemble& ensemble) {
    const std::size_t r = ensemble.paths.size();
    if (r < 100) throw TooFewReplicates("gaussianity needs at least 100 replicates");
    const std::size_t g = ensemble.times.size();

    std::vector<GaussianityPoint> out;
    for (std::size_t j = 1; j < g; ++j) {  // skip the t = 0 anchor
        std::vector<double> x(r);
        for (std::size_t i = 0; i < r; ++i) x[i] = ensemble.paths[i].values[j];

        // center first for numerical stability of the raw power sums
        double shift = 0.0;
        for (double v : x) shift += v;
        shift /= double(r);
        double p1 = 0.0, p2 = 0.0, p3 = 0.0, p4 = 0.0;
        for (double& v : x) {
            v -= shift;
            p1 += v;
            p2 += v * v;
            p3 += v * v * v;
            p4 += v * v * v * v;
        }
        MomentStats full = moments_from_sums(p1, p2, p3, p4, double(r), 1e-14);
        if (!full.ok)
            throw TooFewEffective("degenerate (zero-variance) grid point");

        // delete-one jackknife via leave-one-out power sums
        double s_sum = 0.0, s_sq = 0.0, k_sum = 0.0, k_sq = 0.0;
        for (std::size_t i = 0; i < r; ++i) {
            double v = x[i];
            MomentStats ms = moments_from_sums(p1 - v, p2 - v * v, p3 - v * v * v,
                                               p4 - v * v * v * v, double(r - 1), 1e-14);
            if (!ms.ok) throw TooFewEffective("degenerate jackknife subsample");
            s_sum += ms.skew;
            s_sq += ms.skew * ms.skew;
            k_sum += ms.exkurt;
            k_sq += ms.exkurt * ms.exkurt;
        }
        double sm = s_sum / double(r), km = k_sum / double(r);
        GaussianityPoint p;
        p.time = ensemble.times[j];
        p.skewness = full.skew;
        p.excess_kurtosis = full.exkurt;
        p.skewness_se = std::sqrt(std::max(0.0, (s_sq / double(r) - sm * sm)) * double(r - 1));
        p.kurtosis_se = std::sqrt(std::max(0.0, (k_sq / double(r) - km * km)) * double(r - 1));
        out.push_back(p);
    }
    return out;
}

SlopeFit scaling_exponent(const std::vector<double>& abscissae,
                          const std::vector<double>& values) {
    const std::size_t n = abscissae.size();
    if (values.size() != n || n < 3)
        throw NonpositiveInput("need at least three (x, y) pairs");
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(abscissae[i] > 0.0) || !(values[i] > 0.0))
            throw NonpositiveInput("log-log fit needs strictly positive data");
        lx[i] = std::log(abscissae[i]);
        ly[i] = std::log(values[i]);
    }

    auto fit = [](const std::vector<double>& xs, const std::vector<double>& ys,
                  double& slope, double& intercept) {
        const double m = double(xs.size());
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            sx += xs[i];
            sy += ys[i];
            sxx += xs[i] * xs[i];
            sxy += xs[i] * ys[i];
        }
        double denom = m * sxx - sx * sx;
        if (denom <= 0.0) throw NonpositiveInput("degenerate abscissae for OLS");
        slope = (m * sxy - sx * sy) / denom;
        intercept = (sy - slope * sx) / m;
    };

    SlopeFit f;
    fit(lx, ly, f.slope, f.intercept);
    for (std::size_t i = 0; i < n; ++i)
        f.max_residual = std::max(
            f.max_residual, std::abs(ly[i] - (f.intercept + f.slope * lx[i])));

    double jk_sum = 0.0, jk_sq = 0.0;
    std::vector<double> jx(n - 1), jy(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t w = 0;
        for (std::size_t l = 0; l < n; ++l)
            if (l != i) {
                jx[w] = lx[l];
                jy[w] = ly[l];
                ++w;
            }
        double s, b;
        fit(jx, jy, s, b);
        jk_sum += s;
        jk_sq += s * s;
    }
    double jm = jk_sum / double(n);
    f.slope_se = std::sqrt(std::max(0.0, jk_sq / double(n) - jm * jm) * double(n - 1));
    return f;
}

TrendReport convergence_trend(const std::vector<double>& ladder,
                              const std::vector<double>& estimates,
                              const std::vector<double>& estimate_ses,
                              double limit_value) {
    const std::size_t n = ladder.size();
    if (estimates.size() != n || estimate_ses.size() != n || n < 3)
        throw GridMismatch("trend needs >= 3 matching ladder points");
    if (limit_value == 0.0) throw NonpositiveInput("limit value must be nonzero");

    TrendReport t;
    t.ladder = ladder;
    t.estimates = estimates;
    t.estimate_ses = estimate_ses;
    t.limit_value = limit_value;
    for (std::size_t i = 0; i < n; ++i)
        t.relative_gaps.push_back(std::abs(estimates[i] - limit_value) /
                                  std::abs(limit_value));
    t.monotone = true;
    for (std::size_t i = 1; i < n; ++i) {
        double slack = (estimate_ses[i] + estimate_ses[i - 1]) / std::abs(limit_value);
        if (t.relative_gaps[i] > t.relative_gaps[i - 1] + slack) t.monotone = false;
    }
    t.final_gap = t.relative_gaps.back();
    return t;
}

namespace {

json matrix_json(const std::vector<std::vector<double>>& m) { return json(m); }

std::vector<std::vector<double>> matrix_from(const json& j) {
    return j.get<std::vector<std::vector<double>>>();
}

}  // namespace

std::string to_json(const ComparisonReport& r) {
    json j;
    j["target"] = r.target;
    j["times"] = r.times;
    j["estimated"] = matrix_json(r.estimated);
    j["reference"] = matrix_json(r.reference);
    j["z"] = matrix_json(r.z);
    j["max_abs_z"] = r.max_abs_z;
    j["gate"] = r.gate;
    j["pass"] = r.pass;
    j["scale_n"] = r.scale_n;
    j["replicates"] = r.replicates;
    j["init"] = r.init;
    j["dimension"] = r.dimension;
    return j.dump(2);
}

ComparisonReport comparison_from_json(const std::string& text) {
    json j = json::parse(text);
    ComparisonReport r;
    r.target = j.at("target").get<std::string>();
    r.times = j.at("times").get<std::vector<double>>();
    r.estimated = matrix_from(j.at("estimated"));
    r.reference = matrix_from(j.at("reference"));
    r.z = matrix_from(j.at("z"));
    r.max_abs_z = j.at("max_abs_z").get<double>();
    r.gate = j.at("gate").get<double>();
    r.pass = j.at("pass").get<bool>();
    r.scale_n = j.at("scale_n").get<double>();
    r.replicates = j.at("replicates").get<std::size_t>();
    r.init = j.at("init").get<std::string>();
    r.dimension = j.at("dimension").get<int>();
    return r;
}

std::string to_json(const TrendReport& t) {
    json j;
    j["ladder"] = t.ladder;
    j["estimates"] = t.estimates;
    j["estimate_ses"] = t.estimate_ses;
    j["limit_value"] = t.limit_value;
    j["relative_gaps"] = t.relative_gaps;
    j["monotone"] = t.monotone;
    j["final_gap"] = t.final_gap;
    return j.dump(2);
}

TrendReport trend_from_json(const std::string& text) {
    json j = json::parse(text);
    TrendReport t;
    t.ladder = j.at("ladder").get<std::vector<double>>();
    t.estimates = j.at("estimates").get<std::vector<double>>();
    t.estimate_ses = j.at("estimate_ses").get<std::vector<double>>();
    t.limit_value = j.at("limit_value").get<double>();
    t.relative_gaps = j.at("relative_gaps").get<std::vector<double>>();
    t.monotone = j.at("monotone").get<bool>();
    t.final_gap = j.at("final_gap").get<double>();
    return t;
}

}  // namespace brwsim
