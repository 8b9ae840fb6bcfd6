#include "brwsim/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace brwsim {

namespace {

// particles are stored as coordinates packed 10 bits per axis (side <= 1023)
constexpr int kBits = 10;
constexpr std::uint64_t kMask = (1u << kBits) - 1;

struct TorusGeometry {
    int d;
    int side;
    std::uint64_t cells;
    std::uint64_t strides[6];

    explicit TorusGeometry(const Torus& t) : d(t.dimension), side(t.side), cells(t.cells()) {
        std::uint64_t s = 1;
        for (int i = d - 1; i >= 0; --i) {
            strides[i] = s;
            s *= std::uint64_t(side);
        }
    }

    std::uint64_t linear(std::uint64_t packed) const {
        std::uint64_t idx = 0;
        for (int i = 0; i < d; ++i)
            idx += strides[i] * ((packed >> (kBits * i)) & kMask);
        return idx;
    }

    // apply offset with periodic wrap; |offset| < side
    std::uint64_t move(std::uint64_t packed, const int* offset) const {
        std::uint64_t out = 0;
        for (int i = 0; i < d; ++i) {
            int c = int((packed >> (kBits * i)) & kMask) + offset[i];
            if (c < 0) c += side;
            else if (c >= side) c -= side;
            out |= std::uint64_t(c) << (kBits * i);
        }
        return out;
    }
};

struct JumpTable {
    std::vector<double> cum;          // cumulative probabilities, last == 1
    std::vector<std::array<int, 6>> offsets;

    explicit JumpTable(const WalkKernel& k) {
        double acc = 0.0;
        for (const auto& j : k.jumps) {
            acc += j.prob;
            cum.push_back(acc);
            std::array<int, 6> o{};
            for (int i = 0; i < k.dimension; ++i) o[std::size_t(i)] = j.offset[std::size_t(i)];
            offsets.push_back(o);
        }
        cum.back() = 1.0;
    }
};

void validate(const SimParams& p) {
    if (p.kernel.dimension < 1 || p.kernel.dimension > 6)
        throw ConfigError("simulator supports 1 <= d <= 6");
    if (p.torus_side < 3 || p.torus_side % 2 == 0 || p.torus_side > 1023)
        throw ConfigError("torus side must be odd, in [3, 1023]");
    if (p.theta < 0.0) throw ConfigError("theta must be nonnegative");
    if (p.horizon < 0.0) throw ConfigError("horizon must be nonnegative");
    Torus t{p.kernel.dimension, p.torus_side};
    if (t.cells() > std::uint64_t(1) << 27)
        throw ConfigError("torus too large for the dense state representation");
    double prev = 0.0;
    for (double g : p.record_grid) {
        if (g < prev || g > p.horizon + 1e-12)
            throw ConfigError("record_grid must be sorted within [0, horizon]");
        prev = g;
    }
}

// Dense simulation state reused across burn-in and main run.
class SimState {
public:
    SimState(const SimParams& p, const Configuration& config)
        : params_(p), geom_(config.torus), jumps_(p.kernel), rate_(p.rate) {
        counts_.assign(geom_.cells, 0);
        particles_.reserve(config.total + config.total / 4 + 16);
        for (const auto& [site, count] : config.counts) {
            counts_[site] = count;
            const std::uint64_t packed = pack(site);
            for (std::uint32_t c = 0; c < count; ++c) particles_.push_back(packed);
        }
        xi0_ = counts_[0];
        c2_ = rate_.linear_bound_c2();
        independent_ = rate_.is_independent();
    }

    RunResult simulate(double horizon, const std::vector<double>& grid, Rng& rng,
                       std::uint64_t event_cap) {
        RunResult res;
        res.occupation_at_grid.reserve(grid.size());
        res.sigma_integral_at_grid.reserve(grid.size());
        res.xi0_at_grid.reserve(grid.size());

        double t = 0.0;
        double occ0 = 0.0, sig0 = 0.0, last0 = 0.0;
        std::uint64_t births0 = 0, deaths0 = 0;
        std::uint64_t events = 0;
        std::size_t gi = 0;
        const double branch_total = 1.0 + c2_;
        std::size_t n = particles_.size();

        auto touch_origin = [&](double now) {
            occ0 += double(xi0_) * (now - last0);
            sig0 += rate_(xi0_) * (now - last0);
            last0 = now;
        };

        while (true) {
            double t_next;
            if (n == 0) {
                t_next = horizon;
            } else {
                t_next = t + rng.exponential(branch_total * double(n));
            }
            while (gi < grid.size() && grid[gi] <= t_next && grid[gi] <= horizon) {
                const double g = grid[gi];
                res.occupation_at_grid.push_back(occ0 + double(xi0_) * (g - last0));
                res.sigma_integral_at_grid.push_back(sig0 + rate_(xi0_) * (g - last0));
                res.xi0_at_grid.push_back(xi0_);
                ++gi;
            }
            if (t_next >= horizon || n == 0) break;
            t = t_next;
            if (++events > event_cap)
                throw RateOverflow("event cap exceeded at t=" + std::to_string(t));

            const std::size_t p = std::size_t(rng.below(n));
            const std::uint64_t packed = particles_[p];
            const double u = rng.uniform() * branch_total;
            if (u < 1.0) {
                // jump; reuse u (uniform on [0,1) given a jump) as the
                // offset selector
                std::size_t j = 0;
                while (u >= jumps_.cum[j]) ++j;
                const std::uint64_t dest = geom_.move(packed, jumps_.offsets[j].data());
                const std::uint64_t from = geom_.linear(packed);
                const std::uint64_t to = geom_.linear(dest);
                if (from != to) {
                    if (from == 0 || to == 0) touch_origin(t);
                    --counts_[from];
                    ++counts_[to];
                    if (from == 0) --xi0_;
                    if (to == 0) ++xi0_;
                }
                particles_[p] = dest;
            } else {
                // branch candidate; accept with sigma(k) / (c2 k)
                const std::uint64_t site = geom_.linear(packed);
                const std::uint32_t k = counts_[site];
                // (u - 1) / c2 is uniform on [0,1) given a branch candidate
                bool accept = independent_;
                if (!accept) accept = (u - 1.0) / c2_ * double(k) < rate_(k) / c2_;
                if (accept) {
                    if (site == 0) touch_origin(t);
                    if (rng.uniform() < 0.5) {
                        ++counts_[site];
                        particles_.push_back(packed);
                        ++n;
                        if (site == 0) {
                            ++xi0_;
                            ++births0;
                        }
                    } else {
                        --counts_[site];
                        particles_[p] = particles_.back();
                        particles_.pop_back();
                        --n;
                        if (site == 0) {
                            --xi0_;
                            ++deaths0;
                        }
                    }
                }
            }
        }

        touch_origin(horizon);
        res.counters.births_at_origin = births0;
        res.counters.deaths_at_origin = deaths0;
        res.counters.integrated_count_at_origin = occ0;
        res.counters.integrated_sigma_at_origin = sig0;
        res.events = events;
        return res;
    }

    Configuration snapshot(const Torus& torus) const {
        Configuration c;
        c.torus = torus;
        c.total = particles_.size();
        for (std::uint64_t i = 0; i < geom_.cells; ++i)
            if (counts_[i] > 0) c.counts.emplace(i, counts_[i]);
        return c;
    }

private:
    std::uint64_t pack(std::uint64_t linear) const {
        std::uint64_t packed = 0;
        for (int i = 0; i < geom_.d; ++i) {
            packed |= (linear / geom_.strides[i] % std::uint64_t(geom_.side)) << (kBits * i);
        }
        return packed;
    }

    const SimParams& params_;
    TorusGeometry geom_;
    JumpTable jumps_;
    BranchingRate rate_;
    std::vector<std::uint32_t> counts_;
    std::vector<std::uint64_t> particles_;
    std::uint32_t xi0_ = 0;
    double c2_ = 0.0;
    bool independent_ = false;
};

} // namespace

int derived_torus_side(const CovMatrix& q, double total_time, double safety_multiplier) {
    const double diffusive = std::sqrt(q.lambda_max() * std::max(total_time, 1.0));
    int side = 2 * int(std::ceil(safety_multiplier * diffusive)) + 1;
    return std::max(side, 5);
}

Configuration init_poisson(const SimParams& params, Rng& rng) {
    validate(params);
    Configuration c;
    c.torus = Torus{params.kernel.dimension, params.torus_side};
    const std::uint64_t cells = c.torus.cells();
    for (std::uint64_t site = 0; site < cells; ++site) {
        const std::uint64_t k = rng.poisson(params.theta);
        if (k > 0) {
            c.counts.emplace(site, std::uint32_t(k));
            c.total += k;
        }
    }
    return c;
}

Configuration init_equilibrium(const SimParams& params, Rng& rng) {
    validate(params);
    if (params.kernel.dimension < 3)
        throw UnsupportedDimension("equilibrium initialization requires d >= 3");
    Configuration c = init_poisson(params, rng);
    if (params.t_burn <= 0.0) return c;
    SimState state(params, c);
    (void)state.simulate(params.t_burn, {}, rng, params.event_cap);
    return state.snapshot(c.torus);
}

RunResult run(const SimParams& params, Configuration config, Rng& rng) {
    validate(params);
    if (config.torus.dimension != params.kernel.dimension ||
        config.torus.side != params.torus_side)
        throw ConfigError("configuration torus does not match params");
    SimState state(params, config);
    RunResult res = state.simulate(params.horizon, params.record_grid, rng, params.event_cap);
    res.final_config = state.snapshot(config.torus);
    return res;
}

SigmaEqEstimate estimate_sigma_eq(const SimParams& params, double t_burn, double t_avg,
                                  std::size_t replicates, std::uint64_t master_seed,
                                  int workers) {
    validate(params);
    if (params.kernel.dimension < 3)
        throw UnsupportedDimension("estimate_sigma_eq requires d >= 3");
    if (replicates < 2) throw TooFewReplicates("estimate_sigma_eq needs >= 2 replicates");

    std::vector<double> averages(replicates, 0.0);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= replicates) return;
            Rng rng(master_seed, i);
            SimParams p = params;
            p.t_burn = t_burn;
            p.init = InitKind::Burnin;
            p.horizon = t_avg;
            p.record_grid.clear();
            Configuration c = init_equilibrium(p, rng);
            RunResult r = run(p, std::move(c), rng);
            averages[i] = r.counters.integrated_sigma_at_origin / t_avg;
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    double mean = 0.0;
    for (double a : averages) mean += a;
    mean /= double(replicates);
    double var = 0.0;
    for (double a : averages) var += (a - mean) * (a - mean);
    var /= double(replicates - 1);
    return {mean, std::sqrt(var / double(replicates)), replicates};
}

} // namespace brwsim
