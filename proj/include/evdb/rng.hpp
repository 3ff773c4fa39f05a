#pragma once

#include <cmath>
#include <cstdint>

namespace evdb {

// Deterministic, platform-independent RNG. std::uniform_real_distribution is
// implementation-defined, so all randomness in the repo goes through this.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {
        // warm up so that nearby seeds decorrelate
        next_u64();
        next_u64();
    }

    // splitmix64 step
    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    uint64_t uniform_index(uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

    // standard normal via Box-Muller (deterministic pair consumption)
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Derive an independent stream, e.g. per (seed, window index).
    static Rng derive(uint64_t seed, uint64_t stream) {
        Rng mix(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
        return Rng(mix.next_u64());
    }

private:
    uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace evdb
