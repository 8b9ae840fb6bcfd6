#pragma once

#include <string>
#include <vector>

#include "brwsim/occupation.hpp"

namespace brwsim {

struct ComparisonReport {
    std::string target;                       // "prelimit_exact" or "limit_model"
    std::vector<double> times;
    std::vector<std::vector<double>> estimated;
    std::vector<std::vector<double>> reference;
    std::vector<std::vector<double>> z;
    double max_abs_z = 0.0;
    double gate = 3.0;
    bool pass = false;
    // metadata
    double scale_n = 0.0;
    std::size_t replicates = 0;
    std::string init;
    int dimension = 0;
};

// Entrywise z = (est - ref) / SE over the covariance matrix of a summary.
// Entries with SE below `se_floor` are compared exactly instead.
ComparisonReport compare(const EnsembleSummary& summary,
                         const std::vector<std::vector<double>>& reference,
                         const std::string& target, double gate = 3.0,
                         double se_floor = 1e-300);

struct GaussianityPoint {
    double time = 0.0;
    double skewness = 0.0;
    double skewness_se = 0.0;
    double excess_kurtosis = 0.0;
    double kurtosis_se = 0.0;
};

// Moment-based Gaussianity diagnostic per grid point with delete-one
// jackknife standard errors.  The t = 0 anchor point is skipped.
std::vector<GaussianityPoint> gaussianity(const Ensemble& ensemble);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;    // delete-one jackknife
    double max_residual = 0.0;
};

// OLS slope of log(values) against log(abscissae).
SlopeFit scaling_exponent(const std::vector<double>& abscissae,
                          const std::vector<double>& values);

struct TrendReport {
    std::vector<double> ladder;       // N values
    std::vector<double> estimates;
    std::vector<double> estimate_ses;
    double limit_value = 0.0;
    std::vector<double> relative_gaps;
    bool monotone = false;            // gaps decreasing, with SE slack
    double final_gap = 0.0;
};

TrendReport convergence_trend(const std::vector<double>& ladder,
                              const std::vector<double>& estimates,
                              const std::vector<double>& estimate_ses,
                              double limit_value);

// Lossless JSON round-trips for report artifacts.
std::string to_json(const ComparisonReport& report);
ComparisonReport comparison_from_json(const std::string& text);
std::string to_json(const TrendReport& report);
TrendReport trend_from_json(const std::string& text);

}  // namespace brwsim
