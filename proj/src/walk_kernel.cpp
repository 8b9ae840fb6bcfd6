#include "brwsim/walk_kernel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace brwsim {

namespace {

// gcd of all entries appearing in the support, per coordinate sub-lattice
// check: the offsets generate Z^d iff the lattice they span is all of Z^d.
// We check this via the Smith-normal-form criterion on the integer matrix of
// offsets: the span is Z^d iff the gcd of all d x d minors is 1.
long long det_ll(std::vector<std::vector<long long>> m) {
    // fraction-free Gaussian elimination (Bareiss)
    const int n = int(m.size());
    long long prev = 1;
    for (int k = 0; k < n - 1; ++k) {
        if (m[k][k] == 0) {
            int swap_row = -1;
            for (int i = k + 1; i < n; ++i)
                if (m[i][k] != 0) { swap_row = i; break; }
            if (swap_row < 0) return 0;
            std::swap(m[k], m[swap_row]);
            for (auto& v : m[k]) v = -v;
        }
        for (int i = k + 1; i < n; ++i)
            for (int j = k + 1; j < n; ++j)
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev;
        prev = m[k][k];
    }
    return m[n - 1][n - 1];
}

bool generates_zd(const std::vector<Jump>& jumps, int d) {
    // gcd over determinants of all d-subsets would be exponential; instead
    // reduce the offset list by integer row reduction and check the
    // resulting lattice index. For the small supports we allow, the gcd of
    // all d x d minors over a greedy basis extension is adequate: we compute
    // gcd of det over all combinations of d offsets (support is small).
    std::vector<Offset> offs;
    for (const auto& j : jumps) offs.push_back(j.offset);
    const int n = int(offs.size());
    if (n < d) return false;
    long long g = 0;
    std::vector<int> idx(d);
    // iterate over d-combinations
    std::vector<int> c(d);
    std::iota(c.begin(), c.end(), 0);
    while (true) {
        std::vector<std::vector<long long>> m(d, std::vector<long long>(d));
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) m[i][j] = offs[c[i]][j];
        g = std::gcd(g, std::abs(det_ll(m)));
        if (g == 1) return true;
        // next combination
        int i = d - 1;
        while (i >= 0 && c[i] == n - d + i) --i;
        if (i < 0) break;
        ++c[i];
        for (int j = i + 1; j < d; ++j) c[j] = c[j - 1] + 1;
    }
    return g == 1;
}

} // namespace

WalkKernel build_kernel(const std::vector<std::pair<Offset, double>>& spec,
                        const std::string& name) {
    if (spec.empty()) throw ConfigError("empty kernel spec");
    const int d = int(spec.front().first.size());
    if (d < 1) throw ConfigError("kernel offsets must have dimension >= 1");

    std::map<Offset, double> weights;
    double total = 0.0;
    for (const auto& [off, w] : spec) {
        if (int(off.size()) != d) throw ConfigError("mixed offset dimensions in kernel spec");
        if (w <= 0.0) throw ConfigError("kernel weights must be strictly positive");
        if (std::all_of(off.begin(), off.end(), [](int c) { return c == 0; }))
            throw ZeroOffsetPresent("kernel spec contains the zero offset");
        weights[off] += w;
        total += w;
    }

    for (const auto& [off, w] : weights) {
        Offset neg(off.size());
        for (std::size_t i = 0; i < off.size(); ++i) neg[i] = -off[i];
        auto it = weights.find(neg);
        if (it == weights.end() || std::abs(it->second - w) > 1e-12 * total)
            throw AsymmetricKernel("offset without matching mirror weight");
    }

    WalkKernel k;
    k.dimension = d;
    k.name = name;
    for (const auto& [off, w] : weights) k.jumps.push_back({off, w / total});

    if (!generates_zd(k.jumps, d))
        throw NotIrreducible("kernel support does not generate Z^d");
    return k;
}

WalkKernel srw_kernel(int dimension) {
    std::vector<std::pair<Offset, double>> spec;
    for (int i = 0; i < dimension; ++i) {
        Offset e(dimension, 0);
        e[i] = 1;
        spec.emplace_back(e, 1.0);
        e[i] = -1;
        spec.emplace_back(e, 1.0);
    }
    return build_kernel(spec, "srw-z" + std::to_string(dimension));
}

CovMatrix covariance_matrix(const WalkKernel& kernel) {
    const int d = kernel.dimension;
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(d, d);
    for (const auto& j : kernel.jumps)
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) q(a, b) += j.prob * j.offset[a] * j.offset[b];

    const double det = q.determinant();
    if (!(det > 1e-14)) throw SingularQ("covariance matrix numerically singular");

    CovMatrix cov;
    cov.dimension = d;
    cov.det = det;
    cov.entries.resize(std::size_t(d) * d);
    cov.inverse.resize(std::size_t(d) * d);
    Eigen::MatrixXd qi = q.inverse();
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            cov.entries[std::size_t(a) * d + b] = q(a, b);
            cov.inverse[std::size_t(a) * d + b] = qi(a, b);
        }
    return cov;
}

double CovMatrix::lambda_max() const {
    Eigen::MatrixXd q(dimension, dimension);
    for (int a = 0; a < dimension; ++a)
        for (int b = 0; b < dimension; ++b) q(a, b) = (*this)(a, b);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q);
    return es.eigenvalues().maxCoeff();
}

double CovMatrix::quad_form_inv(const std::vector<double>& x) const {
    double s = 0.0;
    for (int a = 0; a < dimension; ++a)
        for (int b = 0; b < dimension; ++b) s += x[a] * inv(a, b) * x[b];
    return s;
}

} // namespace brwsim
