#pragma once
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "brwsim/errors.hpp"

namespace brwsim {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;  // estimated absolute error
};

// Adaptive Simpson on [a,b] with proportional error allocation: a segment
// is accepted when the halved-step Simpson estimate agrees with the parent
// estimate to within its share of the global tolerance; the accepted value
// takes one Richardson extrapolation step. Integrands here are smooth with
// monotone tails, so the local error estimate is reliable.
inline QuadResult integrate_adaptive(const std::function<double(double)>& f, double a,
                                     double b, double tol, std::size_t max_evals = 2000000) {
    if (b <= a) return {0.0, 0.0};
    struct Seg {
        double a, b, fa, fm, fb, est;
    };
    auto simpson = [](double fa, double fm, double fb, double h) {
        return (fa + 4.0 * fm + fb) * h / 6.0;
    };
    std::size_t evals = 3;
    std::vector<Seg> stack;
    {
        double fa = f(a), fm = f(0.5 * (a + b)), fb = f(b);
        stack.push_back({a, b, fa, fm, fb, simpson(fa, fm, fb, b - a)});
    }
    double value = 0.0, error = 0.0;
    while (!stack.empty()) {
        Seg s = stack.back();
        stack.pop_back();
        const double m = 0.5 * (s.a + s.b);
        const double ml = 0.5 * (s.a + m), mr = 0.5 * (m + s.b);
        const double fml = f(ml), fmr = f(mr);
        evals += 2;
        if (evals > max_evals) throw ToleranceNotReached("adaptive Simpson evaluation cap hit");
        const double left = simpson(s.fa, fml, s.fm, m - s.a);
        const double right = simpson(s.fm, fmr, s.fb, s.b - m);
        const double two = left + right;
        const double local_tol = tol * (s.b - s.a) / (b - a);
        if (std::abs(two - s.est) < 15.0 * local_tol || (s.b - s.a) < 1e-12 * (b - a)) {
            value += two + (two - s.est) / 15.0;
            error += std::abs(two - s.est) / 15.0;
        } else {
            stack.push_back({s.a, m, s.fa, fml, s.fm, left});
            stack.push_back({m, s.b, s.fm, fmr, s.fb, right});
        }
    }
    return {value, error};
}

// Piecewise-cubic-accurate cumulative integral table on a fixed grid.
// Values are integrated with composite Simpson between consecutive nodes
// (grid spacing is chosen by the caller to resolve the integrand).
class CumulativeTable {
public:
    CumulativeTable() = default;
    CumulativeTable(std::vector<double> x, const std::vector<double>& f) : x_(std::move(x)) {
        // cumulative trapezoid with third-order end correction per panel
        // (uses the neighbour node to approximate curvature)
        const std::size_t n = x_.size();
        cum_.assign(n, 0.0);
        f_ = f;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double h = x_[i + 1] - x_[i];
            double panel = 0.5 * (f[i] + f[i + 1]) * h;
            // curvature correction -h^2/12 * (f'(b) - f'(a)), one-sided at ends
            double da, db;
            if (i > 0)
                da = (f[i + 1] - f[i - 1]) / (x_[i + 1] - x_[i - 1]);
            else
                da = (f[i + 1] - f[i]) / h;
            if (i + 2 < n)
                db = (f[i + 2] - f[i]) / (x_[i + 2] - x_[i]);
            else
                db = (f[i + 1] - f[i]) / h;
            panel -= h * h / 12.0 * (db - da);
            cum_[i + 1] = cum_[i] + panel;
        }
    }

    bool empty() const { return x_.empty(); }
    double x_max() const { return x_.empty() ? 0.0 : x_.back(); }

    // cumulative integral at t, linear in-cell interpolation of the integrand
    double operator()(double t) const {
        if (t <= x_.front()) return 0.0;
        if (t >= x_.back()) return cum_.back();
        std::size_t lo = locate(t);
        const double h = t - x_[lo];
        const double w = x_[lo + 1] - x_[lo];
        const double fmid = f_[lo] + (f_[lo + 1] - f_[lo]) * (h / w) * 0.5;
        return cum_[lo] + fmid * h;
    }

    // integrand value by linear interpolation
    double value(double t) const {
        if (t <= x_.front()) return f_.front();
        if (t >= x_.back()) return f_.back();
        std::size_t lo = locate(t);
        const double w = (t - x_[lo]) / (x_[lo + 1] - x_[lo]);
        return f_[lo] * (1.0 - w) + f_[lo + 1] * w;
    }

    const std::vector<double>& grid() const { return x_; }
    const std::vector<double>& cumulative() const { return cum_; }

private:
    std::size_t locate(double t) const {
        std::size_t lo = 0, hi = x_.size() - 1;
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            (x_[mid] <= t ? lo : hi) = mid;
        }
        return lo;
    }

    std::vector<double> x_, f_, cum_;
};

} // namespace brwsim
