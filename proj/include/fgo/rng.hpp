#pragma once

#include "fgo/types.hpp"

#include <cmath>
#include <cstdint>

namespace fgo {

/// Deterministic xorshift-based RNG with explicit distributions, so streams
/// are reproducible across standard libraries and platforms.
class Rng {
  public:
    explicit Rng(uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {
        // Warm up past low-entropy seeds.
        next();
        next();
    }

    uint64_t next() {
        // splitmix64
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    int uniform_int(int lo, int hi_inclusive) {
        const uint64_t span = static_cast<uint64_t>(hi_inclusive - lo) + 1;
        return lo + static_cast<int>(next() % span);
    }

    /// Standard normal via Box-Muller.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    Vec3 normal_vec3() { return Vec3(normal(), normal(), normal()); }

    Vec3 uniform_vec3(double lo, double hi) {
        return Vec3(uniform(lo, hi), uniform(lo, hi), uniform(lo, hi));
    }

    Vec3 unit_vec3() {
        Vec3 v = normal_vec3();
        while (v.norm() < 1e-9) v = normal_vec3();
        return v.normalized();
    }

    Quat random_rotation() {
        // Uniformly distributed unit quaternion (Shoemake).
        const double u1 = uniform(), u2 = uniform(), u3 = uniform();
        const double s1 = std::sqrt(1.0 - u1), s2 = std::sqrt(u1);
        return Quat(s2 * std::cos(2.0 * M_PI * u3),
                    s1 * std::sin(2.0 * M_PI * u2),
                    s1 * std::cos(2.0 * M_PI * u2),
                    s2 * std::sin(2.0 * M_PI * u3))
            .normalized();
    }

  private:
    uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace fgo
