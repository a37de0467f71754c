#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "cot/error.hpp"

namespace cot {

// splitmix64 step; used to spread user seeds into well-mixed stream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Stream purposes.  Every command derives one independent generator per
// purpose (and per sample index where noted) from its single root seed, so
// results never depend on evaluation order or worker count.
enum class Stream : std::uint64_t {
    sample = 1,      // per-sample scene+surface draws in dataset generation
    split = 2,       // train/val/test permutation
    init = 3,        // weight initialization
    batch = 4,       // batch index sampling during training
    noise = 5,       // train-time input noise
    eval_noise = 6,  // evaluation-time input noise, per noise level
    raster = 7,      // synthetic raster scenes
};

// Deterministic generator with hand-rolled variate transforms.  The standard
// <random> distributions are implementation-defined, so we only use the
// mt19937_64 engine (whose output is pinned by the standard) and derive
// uniform / normal / gamma draws ourselves.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // Generator for (root seed, purpose, index) tuples, e.g. per-sample scene
    // draws use stream(seed, Stream::sample, i).
    static Rng stream(std::uint64_t root, Stream purpose, std::uint64_t index = 0) {
        std::uint64_t s = mix64(root);
        s = mix64(s ^ static_cast<std::uint64_t>(purpose));
        s = mix64(s ^ index);
        return Rng(s);
    }

    std::uint64_t next_u64() { return eng_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer on [0, n).
    std::uint64_t below(std::uint64_t n) {
        require(n > 0, Errc::bad_count, "below(0)");
        // Rejection sampling on the top bits; bias-free for any n.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = eng_();
        while (v >= limit) v = eng_();
        return v % n;
    }

    // Standard normal via Box-Muller (cosine branch only, so each draw
    // consumes exactly two engine outputs).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return r * std::cos(6.283185307179586476925286766559 * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    // Gamma(shape, scale) via Marsaglia-Tsang squeeze; shape < 1 handled with
    // the standard boost gamma(a) = gamma(a+1) * U^(1/a).
    double gamma(double shape, double scale) {
        require(shape > 0.0 && scale > 0.0, Errc::out_of_range, "gamma parameters must be positive");
        if (shape < 1.0) {
            const double u = std::pow(uniform_open(), 1.0 / shape);
            return gamma(shape + 1.0, scale) * u;
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            const double u = uniform_open();
            const double x2 = x * x;
            if (u < 1.0 - 0.0331 * x2 * x2) return d * v * scale;
            if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v * scale;
        }
    }

private:
    // Uniform on (0, 1); rejects exact zeros so log() stays finite.
    double uniform_open() {
        double u = uniform();
        while (u <= 0.0) u = uniform();
        return u;
    }

    std::mt19937_64 eng_;
};

}  // namespace cot
