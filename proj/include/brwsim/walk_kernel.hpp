#pragma once
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "brwsim/errors.hpp"

namespace brwsim {

using Offset = std::vector<int>;

struct Jump {
    Offset offset;
    double prob;
};

// Symmetric finite-range jump law a(0,.) on Z^d. Stochastic (probs sum to 1),
// symmetric under z -> -z, support generates Z^d, no zero offset.
struct WalkKernel {
    int dimension = 0;
    std::vector<Jump> jumps;
    std::string name;

    int max_range() const {
        int r = 0;
        for (const auto& j : jumps)
            for (int c : j.offset) r = std::max(r, std::abs(c));
        return r;
    }

    // true when every jump moves along a single coordinate axis; the
    // transition function then factorizes over coordinates
    bool axis_decomposable() const {
        for (const auto& j : jumps) {
            int nonzero = 0;
            for (int c : j.offset)
                if (c != 0) ++nonzero;
            if (nonzero != 1) return false;
        }
        return true;
    }
};

struct CovMatrix {
    int dimension = 0;
    std::vector<double> entries;  // row-major d x d
    std::vector<double> inverse;  // row-major d x d
    double det = 0.0;

    double operator()(int i, int j) const { return entries[std::size_t(i) * dimension + j]; }
    double inv(int i, int j) const { return inverse[std::size_t(i) * dimension + j]; }
    // largest eigenvalue, used for diffusive-scale estimates
    double lambda_max() const;
    // x^T Q^{-1} x
    double quad_form_inv(const std::vector<double>& x) const;
};

// Validates and normalizes a kernel spec (offset, weight) list.
// Throws ZeroOffsetPresent / AsymmetricKernel / NotIrreducible.
WalkKernel build_kernel(const std::vector<std::pair<Offset, double>>& spec,
                        const std::string& name = "");

// Simple random walk on Z^d: 2d unit offsets, probability 1/(2d) each.
WalkKernel srw_kernel(int dimension);

// Q_ij = sum_x a(0,x) x_i x_j  (finite and invertible for valid kernels)
CovMatrix covariance_matrix(const WalkKernel& kernel);

} // namespace brwsim
