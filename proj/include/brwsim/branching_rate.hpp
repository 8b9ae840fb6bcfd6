#pragma once
#include <cmath>
#include <cstdint>
#include <vector>

#include "brwsim/errors.hpp"

namespace brwsim {

// Per-site branching rate sigma(k). Lipschitz with constant lipschitz_c,
// sigma(0) = 0, sigma(k) <= linear_bound_c2 * k, not identically zero.
// Tabulated rates are extended affinely beyond the table with a slope that
// keeps both bounds valid.
class BranchingRate {
public:
    static BranchingRate independent(double rho) {
        if (rho <= 0.0) throw ConfigError("independent branching needs rho > 0 (sigma must not vanish)");
        BranchingRate r;
        r.rho_ = rho;
        r.lipschitz_ = rho;
        r.c2_ = rho;
        return r;
    }

    static BranchingRate tabulated(std::vector<double> values, double extension_slope = -1.0) {
        if (values.size() < 2) throw ConfigError("tabulated sigma needs at least sigma(0), sigma(1)");
        if (values[0] != 0.0) throw ConfigError("sigma(0) must be 0");
        double lip = 0.0, c2 = 0.0;
        bool nonzero = false;
        for (std::size_t k = 0; k < values.size(); ++k) {
            if (values[k] < 0.0) throw ConfigError("sigma values must be nonnegative");
            if (values[k] > 0.0) nonzero = true;
            if (k > 0) {
                // Lipschitz constant over all tabulated pairs reduces to the
                // max consecutive difference for integer arguments
                lip = std::max(lip, std::abs(values[k] - values[k - 1]));
                c2 = std::max(c2, values[k] / double(k));
            }
        }
        if (!nonzero) throw ConfigError("sigma must not be identically zero");
        BranchingRate r;
        r.table_ = std::move(values);
        r.slope_ = extension_slope < 0.0 ? 0.0 : extension_slope;
        if (r.slope_ > lip) lip = r.slope_;
        r.lipschitz_ = lip;
        r.c2_ = std::max(c2, r.slope_);
        if (r.c2_ <= 0.0) throw ConfigError("sigma must not be identically zero");
        return r;
    }

    bool is_independent() const { return rho_ > 0.0; }
    double rho() const { return rho_; }
    double lipschitz_c() const { return lipschitz_; }
    double linear_bound_c2() const { return c2_; }

    double operator()(std::uint64_t k) const {
        if (rho_ > 0.0) return rho_ * double(k);
        if (k < table_.size()) return table_[k];
        return table_.back() + slope_ * double(k - (table_.size() - 1));
    }

private:
    BranchingRate() = default;
    double rho_ = 0.0;  // > 0 iff independent
    std::vector<double> table_;
    double slope_ = 0.0;
    double lipschitz_ = 0.0;
    double c2_ = 0.0;
};

} // namespace brwsim
