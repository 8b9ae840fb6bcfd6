#pragma once
#include <cmath>
#include <cstdint>

namespace brwsim {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256++ with streams derived from (master seed, stream index) via
// splitmix64. Replicates own disjoint streams, so results are independent
// of scheduling order and worker count.
class Rng {
public:
    Rng() : Rng(0, 0) {}
    Rng(std::uint64_t master_seed, std::uint64_t stream) {
        std::uint64_t sm = master_seed ^ (0x6a09e667f3bcc909ULL + stream * 0x9e3779b97f4a7c15ULL);
        for (auto& w : s_) w = splitmix64(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform in [0,1)
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in (0,1], safe as log() argument
    double uniform_pos() { return double((next_u64() >> 11) + 1) * 0x1.0p-53; }

    double exponential(double rate) { return -std::log(uniform_pos()) / rate; }

    // index in [0, n)
    std::uint64_t below(std::uint64_t n) {
        // multiply-shift; bias is < n / 2^64, irrelevant at our scales
        return std::uint64_t((__uint128_t(next_u64()) * n) >> 64);
    }

    double normal() {
        // Box-Muller, one value per call (cache the spare)
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u = uniform_pos();
        double v = uniform();
        double r = std::sqrt(-2.0 * std::log(u));
        double a = 6.283185307179586476925286766559 * v;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    std::uint64_t poisson(double mean) {
        if (mean <= 0.0) return 0;
        std::uint64_t total = 0;
        // split large means so the multiplicative method stays in range
        while (mean > 30.0) {
            double half = mean * 0.5;
            total += poisson_knuth(half);
            mean -= half;
        }
        return total + poisson_knuth(mean);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t poisson_knuth(double mean) {
        const double limit = std::exp(-mean);
        std::uint64_t k = 0;
        double p = uniform_pos();
        while (p > limit) {
            ++k;
            p *= uniform_pos();
        }
        return k;
    }

    std::uint64_t s_[4];
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace brwsim
