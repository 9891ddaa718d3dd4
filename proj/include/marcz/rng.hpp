#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>

namespace marcz::rng {

/// SplitMix64 step; used to turn (seed, stream) pairs into well-mixed seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Derive an independent stream seed from a master seed and a stream index.
/// Trials partitioned by (seed, index) give results that do not depend on
/// how work is split across workers.
inline std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed ^ (0xD1B54A32D192ED03ULL * (stream + 1));
    splitmix64(s);
    return splitmix64(s);
}

/// Deterministic random engine. mt19937_64 has a fully specified sequence,
/// and all distributions below are hand-rolled so that outputs are identical
/// across standard libraries.
class Engine {
public:
    explicit Engine(std::uint64_t seed) : gen_(seed) {}

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller (no cached spare, stateless pairs).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log1p(-u1));
        return r * std::cos(2.0 * M_PI * u2);
    }

    /// Unbiased integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = ~std::uint64_t(0) - ~std::uint64_t(0) % n;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

    Eigen::VectorXd gaussian(int n) {
        Eigen::VectorXd v(n);
        for (int i = 0; i < n; ++i) v[i] = normal();
        return v;
    }

    /// Uniform point on the unit sphere S^{n-1}.
    Eigen::VectorXd sphere(int n) {
        Eigen::VectorXd v = gaussian(n);
        double norm = v.norm();
        while (norm < 1e-300) {
            v = gaussian(n);
            norm = v.norm();
        }
        return v / norm;
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace marcz::rng
