#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string_view>
#include <vector>

namespace csd {

// Deterministic random source. The generator (mt19937_64) and every variate
// transform live here so that sampled streams are pinned to this code, not to
// the standard library's unspecified distribution algorithms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(splitmix(seed)) {}

    std::uint64_t next_u64() {
        // xorshift* step on splitmix-initialized state
        std::uint64_t x = state_;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        state_ = x;
        return x * 0x2545F4914F6CDD1DULL;
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t threshold = (0ULL - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Zero-mean Laplace with scale b (variance 2b^2).
    double laplace(double b) {
        const double u = uniform() - 0.5;
        return -b * std::copysign(std::log(1.0 - 2.0 * std::abs(u)), u);
    }

    /// Zero-mean uniform noise with unit variance at s=1: U[-sqrt(3)s, sqrt(3)s].
    double uniform_noise(double s) {
        const double half = std::sqrt(3.0) * s;
        return uniform(-half, half);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    std::vector<std::size_t> permutation(std::size_t n) {
        std::vector<std::size_t> p(n);
        std::iota(p.begin(), p.end(), std::size_t{0});
        shuffle(p);
        return p;
    }

    /// Child generator for a named subsystem; streams for different tags are
    /// decorrelated regardless of draw order in the parent.
    Rng derive(std::string_view tag) const {
        std::uint64_t h = 1469598103934665603ULL; // FNV-1a offset
        for (const char c : tag) {
            h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
            h *= 1099511628211ULL;
        }
        return Rng(splitmix(state_ ^ h));
    }

    Rng derive(std::string_view tag, std::uint64_t index) const {
        Rng child = derive(tag);
        return Rng(splitmix(child.state_ ^ splitmix(index + 0x9E3779B97F4A7C15ULL)));
    }

private:
    static constexpr double kPi = 3.14159265358979323846;

    static std::uint64_t splitmix(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        x = x ^ (x >> 31);
        return x ? x : 0x9E3779B97F4A7C15ULL; // xorshift state must be nonzero
    }

    std::uint64_t state_;
};

} // namespace csd
