#pragma once

#include <cstdint>
#include <cmath>

namespace waverate {

// Counter-based deterministic RNG. Every consumer derives its own stream from
// (seed, stream) so parallel and serial runs produce identical numbers
// regardless of scheduling. Not cryptographic.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
        std::uint64_t s = seed;
        std::uint64_t mixed = splitmix64(s);
        state_ = mixed ^ (0x9E3779B97F4A7C15ull * (stream + 1));
        // burn-in decorrelates nearby streams
        next_u64();
        next_u64();
    }

    std::uint64_t next_u64() { return splitmix64(state_); }

    // uniform on [0,1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform on (0,1]
    double uniform_pos() { return 1.0 - uniform(); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal via Box-Muller (explicit, libc-independent)
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform_pos();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t state_ = 0;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace waverate
