#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace satint {

/**
 * Seedable, portable random source.
 *
 * Raw bits come from std::mt19937_64 (its output sequence is pinned by the
 * standard), and all distributions are derived here from those bits, so the
 * same seed gives the same stream on every platform.
 *
 * Stream splitting: Rng::stream(seed, index) mixes the index into the seed
 * with splitmix64, giving one independent stream per work item. Parallel and
 * serial runs over indexed items therefore draw identical numbers.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Independent stream for work item `index` under the run seed.
    static Rng stream(std::uint64_t seed, std::uint64_t index) {
        return Rng(mix64(seed ^ mix64(index + 0x9E3779B97F4A7C15ULL)));
    }

    /// splitmix64 finalizer.
    static std::uint64_t mix64(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [a, b).
    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    /// Uniform integer in [lo, hi] inclusive.
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(uniform01() * static_cast<double>(hi - lo + 1));
    }

    /// Standard normal via Box-Muller.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        if (u1 < 1e-300) u1 = 1e-300;
        const double mag = std::sqrt(-2.0 * std::log(u1));
        spare_ = mag * std::sin(2.0 * M_PI * u2);
        have_spare_ = true;
        return mag * std::cos(2.0 * M_PI * u2);
    }

    /// Uniformly distributed unit vector in R^n.
    Eigen::VectorXd unit_vector(int n) {
        Eigen::VectorXd v(n);
        double norm = 0.0;
        do {
            for (int i = 0; i < n; ++i) v[i] = normal();
            norm = v.norm();
        } while (norm < 1e-12);
        return v / norm;
    }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace satint
