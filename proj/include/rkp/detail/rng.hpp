// rkp/detail/rng.hpp
// Seeded RNG with platform-independent double output.
#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <random>

namespace rkp::detail {

/// mt19937_64 with a fixed 53-bit mapping to [0,1). std::uniform_real_distribution
/// is implementation-defined, which would break byte-identical reruns.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    /// Uniform point on the unit 2-sphere.
    Eigen::Vector3d unit_vector3() {
        const double z = uniform(-1.0, 1.0);
        const double phi = uniform(0.0, 2.0 * M_PI);
        const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
        return {s * std::cos(phi), s * std::sin(phi), z};
    }

    std::uint64_t raw() { return gen_(); }

  private:
    std::mt19937_64 gen_;
};

}  // namespace rkp::detail
