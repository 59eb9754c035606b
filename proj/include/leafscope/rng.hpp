#pragma once

#include "leafscope/common.hpp"

namespace leafscope {

// xoshiro256** with a splitmix64 seeding stage.  Every sampled quantity in
// the library flows through this generator so results are reproducible for
// a fixed ToleranceConfig::seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& word : state_) {
            x += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            word = z ^ (z >> 31);
        }
    }

    // Derives an independent stream for a named purpose, so e.g. the fixed
    // sample grid and the rejection sampler do not share state.
    Rng fork(std::uint64_t salt) const {
        Rng r(*this);
        r.state_[0] ^= 0xd1b54a32d192ed03ULL * (salt + 1);
        r.state_[2] ^= 0x8cb92ba72f3d8dd7ULL * (salt + 0x51ULL);
        r.next();
        r.next();
        return r;
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    std::uint64_t below(std::uint64_t n) { return next() % n; }

    // Standard complex normal (unit variance per real component).
    Complex normal() {
        double u1 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return {r * std::cos(2.0 * kPi * u2), r * std::sin(2.0 * kPi * u2)};
    }

    std::vector<Complex> normal_vector(std::size_t n) {
        std::vector<Complex> v(n);
        for (auto& z : v) z = normal();
        return v;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t state_[4];
};

}  // namespace leafscope
