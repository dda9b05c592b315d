#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

namespace gexia {

// Counter-based deterministic generator. Every stream is keyed by
// (seed, name[, step]) so initialization and per-step sampling are
// reproducible without carrying mutable generator state across runs.
class Rng {
public:
    Rng(std::uint64_t seed, std::string_view name) : key_(mix(seed ^ fnv1a(name))) {}

    Rng(std::uint64_t seed, std::string_view name, std::uint64_t step)
        : key_(mix(mix(seed ^ fnv1a(name)) + step * 0x9e3779b97f4a7c15ULL)) {}

    std::uint64_t next_u64() { return mix(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL); }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

    // Standard normal via Box-Muller.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    double normal(double stddev) { return stddev * normal(); }

    static std::uint64_t fnv1a(std::string_view s) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

private:
    // splitmix64 finalizer
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

}  // namespace gexia
