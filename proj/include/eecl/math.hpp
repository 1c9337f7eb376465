#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace eecl {

// Observations and actions are fixed-length real vectors.
using Vec = std::vector<double>;

inline double clip(double x, double lo, double hi) {
    return std::min(std::max(x, lo), hi);
}

inline void clip_inplace(Vec& v, double lo, double hi) {
    for (double& x : v) x = clip(x, lo, hi);
}

// Squared L2 distance, accumulated in index order. The kd-tree and the
// linear-scan oracle must both use this so their results match bitwise.
inline double squared_distance(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double l2_distance(const Vec& a, const Vec& b) {
    return std::sqrt(squared_distance(a, b));
}

inline bool all_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derives an independent seed for a named stream (agent init, action noise,
// episode resets, ...) so that one master seed drives the whole run.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(splitmix64(seed) ^ stream);
}

// Seeded generator. Distribution objects are constructed per call so a draw
// never depends on hidden distribution state, only on the generator position.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(gen_);
    }

    double normal(double mean, double stddev) {
        if (stddev <= 0.0) return mean;
        return std::normal_distribution<double>(mean, stddev)(gen_);
    }

    std::size_t index(std::size_t n) {
        if (n == 0) throw std::invalid_argument("Rng::index: empty range");
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen_);
    }

    std::uint64_t next() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

}  // namespace eecl
