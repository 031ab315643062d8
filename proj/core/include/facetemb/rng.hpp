#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace facetemb {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seeded generator with self-contained draw functions. std::mt19937_64 output
/// is fully specified by the standard and the mappings below avoid the
/// implementation-defined std distributions, so every draw is reproducible
/// across platforms and library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), eng_(splitmix64(seed)) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Unbiased uniform index in [0, n). n must be > 0.
    std::size_t uniform_index(std::size_t n) {
        const std::uint64_t threshold = (0 - static_cast<std::uint64_t>(n)) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return static_cast<std::size_t>(r % n);
        }
    }

    /// Standard normal via Box-Muller (single value per call).
    double normal() {
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = uniform_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    /// Independent stream derived from the original seed.
    Rng child(std::uint64_t stream) const { return Rng(splitmix64(seed_ ^ (0x517cc1b727220a95ULL * (stream + 1)))); }

private:
    std::uint64_t seed_;
    std::mt19937_64 eng_;
};

}  // namespace facetemb
