#pragma once

#include <cstdint>

namespace beliefnav {

/// splitmix64 generator with platform-independent uniform helpers, so seeded
/// runs reproduce bit-identically everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n); n must be positive.
    int uniform_int(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }

    /// Derives an independent stream (for per-chain / per-episode seeding).
    std::uint64_t fork() { return next(); }

private:
    std::uint64_t state_;
};

/// Mixes a base seed with a stream index into an independent seed.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
    Rng r(base ^ (0x9e3779b97f4a7c15ull * (stream + 1)));
    return r.next();
}

} // namespace beliefnav
