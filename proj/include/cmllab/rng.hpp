#pragma once
#include <cstdint>

namespace cmllab {

// Counter-based 64-bit generator (splitmix64). Cheap to fork: any
// (seed, stream) pair yields an independent reproducible sequence, which is
// what the sweep scheduler relies on to make results independent of the
// worker count.
struct Rng {
    std::uint64_t state = 0;

    Rng() = default;
    explicit Rng(std::uint64_t seed) : state(seed) {}

    // child stream k of a master seed; never touches the parent state
    static Rng stream(std::uint64_t seed, std::uint64_t k) {
        Rng r(seed + 0x9e3779b97f4a7c15ULL * (k + 1));
        r.next();
        return r;
    }

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0,1) with full 53-bit mantissa
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n); modulo bias is irrelevant at our n
    std::uint64_t below(std::uint64_t n) { return next() % n; }
};

} // namespace cmllab
