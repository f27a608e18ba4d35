#ifndef KINOPLAN_TEST_HELPERS_HPP
#define KINOPLAN_TEST_HELPERS_HPP

#include <cmath>
#include <functional>

#include "kinoplan/rng.hpp"
#include "kinoplan/trajectory.hpp"

namespace kinoplan::test {

// Adaptive Simpson quadrature; test-only oracle, independent of the
// closed-form integrals in the library.
inline double adaptiveSimpson(const std::function<double(double)> &f, double a,
                              double b, double tol = 1e-10, int depth = 24) {
  struct Impl {
    const std::function<double(double)> &f;
    double run(double a, double b, double fa, double fm, double fb,
               double whole, double tol, int depth) {
      const double m = 0.5 * (a + b);
      const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
      const double flm = f(lm), frm = f(rm);
      const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
      const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
      if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
      }
      return run(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
             run(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    }
  } impl{f};
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return impl.run(a, b, fa, fm, fb, whole, tol, depth);
}

inline Piece randomQuintic(Rng &rng, double dur_lo = 0.5, double dur_hi = 4.0,
                           double coeff_mag = 2.0) {
  Eigen::Matrix3Xd c(3, 6);
  for (int ax = 0; ax < 3; ++ax) {
    for (int k = 0; k < 6; ++k) {
      c(ax, k) = rng.uniform(-coeff_mag, coeff_mag);
    }
  }
  return Piece(c, rng.uniform(dur_lo, dur_hi));
}

inline FlatState randomState(Rng &rng, double pos_mag = 10.0,
                             double vel_mag = 5.0, double acc_mag = 3.0) {
  return FlatState(rng.inBox(Vec3::Constant(-pos_mag), Vec3::Constant(pos_mag)),
                   rng.inBox(Vec3::Constant(-vel_mag), Vec3::Constant(vel_mag)),
                   rng.inBox(Vec3::Constant(-acc_mag), Vec3::Constant(acc_mag)));
}

}  // namespace kinoplan::test

#endif
