#ifndef ADAMIXUP_RNG_HPP
#define ADAMIXUP_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "adamixup/errors.hpp"

namespace adamixup {

// Deterministic RNG with hand-rolled distributions. std::* distributions are
// implementation-defined, so every draw here is derived from raw mt19937_64
// output to keep runs byte-reproducible.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    // Independent stream derived from (seed, tag): parameter init and the
    // training loop draw from separate streams so that model-topology changes
    // do not shift unrelated draws.
    static Rng stream(uint64_t seed, const std::string& tag) {
        return Rng(splitmix(seed ^ fnv1a(tag)));
    }

    uint64_t next_u64() { return engine_(); }

    // Uniform on [0,1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform on the open interval (0,1); never returns an endpoint.
    double uniform_open01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform_in(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    size_t uniform_index(size_t n) {
        if (n == 0) throw ContractError("uniform_index: empty range");
        return static_cast<size_t>(uniform() * static_cast<double>(n)) % n;
    }

    // Box-Muller without caching so draw count stays predictable.
    double normal() {
        double u1 = uniform_open01();
        double u2 = uniform_open01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    // Marsaglia-Tsang; shape < 1 boosted via Gamma(a+1) * U^(1/a).
    double gamma(double shape) {
        if (shape <= 0.0) throw ContractError("gamma: shape must be positive");
        if (shape < 1.0) {
            double u = uniform_open01();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            double u = uniform_open01();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double beta(double a, double b) {
        double x = gamma(a);
        double y = gamma(b);
        return x / (x + y);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = uniform_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    std::vector<size_t> permutation(size_t n) {
        std::vector<size_t> p(n);
        for (size_t i = 0; i < n; ++i) p[i] = i;
        shuffle(p);
        return p;
    }

    static uint64_t fnv1a(const std::string& s) {
        uint64_t h = 1469598103934665603ull;
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
        return h;
    }

    static uint64_t splitmix(uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

private:
    std::mt19937_64 engine_;
};

} // namespace adamixup

#endif
