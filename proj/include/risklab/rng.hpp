#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace risklab {

// splitmix64 finalizer. This is the documented integer mixing function used
// everywhere seeds are derived; it is bijective, so distinct inputs give
// distinct outputs for a fixed master seed.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Trial seed = chained splitmix over (master, learner id, n, trial index).
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view learner_id,
                                 std::uint64_t n, std::uint64_t trial) {
    std::uint64_t s = mix64(master ^ fnv1a64(learner_id));
    s = mix64(s ^ (n * 0x9e3779b97f4a7c15ULL));
    s = mix64(s ^ (trial + 0x2545f4914f6cdd1dULL));
    return s;
}

// Small self-contained generator (splitmix64 stream). Used instead of the
// <random> distributions so that draws are identical across platforms and
// across serial/parallel execution.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform integer in [0, n)
    std::uint64_t next_below(std::uint64_t n) {
        return next_u64() % n;
    }

    // standard normal via Box-Muller; the spare is cached
    double next_gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = next_double();
        double u2 = next_double();
        if (u1 < 1e-300) u1 = 1e-300;
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace risklab
