#ifndef KINOPLAN_RNG_HPP
#define KINOPLAN_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

#include "kinoplan/trajectory.hpp"

namespace kinoplan {

// Deterministic random stream. All transforms are written out explicitly so
// that sequences are identical across standard libraries, which keeps
// benchmark outputs byte-reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // Derive an independent stream, e.g. one per benchmark trial.
  static Rng forTrial(std::uint64_t scenario_seed, std::uint64_t trial_index) {
    return Rng(scenario_seed * 0x9E3779B97F4A7C15ull + trial_index + 1ull);
  }

  std::uint64_t bits() { return eng_(); }

  double uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

  int uniformInt(int lo, int hi) {  // inclusive bounds
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1ull;
    return lo + static_cast<int>(eng_() % span);
  }

  double gaussian() {
    // Box-Muller; one value per call keeps the stream layout simple.
    double u1 = uniform01();
    while (u1 <= 1e-300) {
      u1 = uniform01();
    }
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  Vec3 inBox(const Vec3 &lo, const Vec3 &hi) {
    return Vec3(uniform(lo.x(), hi.x()), uniform(lo.y(), hi.y()),
                uniform(lo.z(), hi.z()));
  }

  Vec3 unitVector() {
    Vec3 v(gaussian(), gaussian(), gaussian());
    double n = v.norm();
    while (n < 1e-12) {
      v = Vec3(gaussian(), gaussian(), gaussian());
      n = v.norm();
    }
    return v / n;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace kinoplan

#endif
