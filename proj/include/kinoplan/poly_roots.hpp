#ifndef KINOPLAN_POLY_ROOTS_HPP
#define KINOPLAN_POLY_ROOTS_HPP

#include <Eigen/Dense>
#include <cmath>
#include <vector>

namespace kinoplan {

// Horner evaluation of a polynomial in ascending-power coefficients.
inline double polyVal(const Eigen::VectorXd &coeffs, double t) {
  double v = 0.0;
  for (int k = static_cast<int>(coeffs.size()) - 1; k >= 0; --k) {
    v = v * t + coeffs[k];
  }
  return v;
}

inline Eigen::VectorXd polyDerivative(const Eigen::VectorXd &coeffs) {
  const int n = static_cast<int>(coeffs.size());
  if (n <= 1) {
    return Eigen::VectorXd::Zero(1);
  }
  Eigen::VectorXd d(n - 1);
  for (int k = 1; k < n; ++k) {
    d[k - 1] = coeffs[k] * k;
  }
  return d;
}

// All real roots of the polynomial in [lo, hi], ascending order.
// Roots are found as eigenvalues of the companion matrix of the
// time-normalized polynomial and polished with a few Newton steps.
inline std::vector<double> realRootsInInterval(const Eigen::VectorXd &coeffs,
                                               double lo, double hi) {
  std::vector<double> roots;
  int deg = static_cast<int>(coeffs.size()) - 1;
  while (deg > 0 && std::abs(coeffs[deg]) < 1e-14 * coeffs.cwiseAbs().maxCoeff()) {
    --deg;
  }
  if (deg <= 0) {
    return roots;
  }
  const double span = hi - lo;
  if (!(span > 0.0)) {
    return roots;
  }

  // Normalize time to s in [0,1]: q(s) = p(lo + s*span).
  Eigen::VectorXd q = Eigen::VectorXd::Zero(deg + 1);
  {
    // Shift then scale via synthetic expansion of p(lo + u), u = s*span.
    Eigen::VectorXd shifted = coeffs.head(deg + 1);
    // Taylor coefficients of p about lo by repeated synthetic division.
    Eigen::VectorXd work = shifted;
    for (int k = 0; k <= deg; ++k) {
      for (int i = deg - 1; i >= k; --i) {
        work[i] += work[i + 1] * lo;
      }
      q[k] = work[k];
    }
    double scale = 1.0;
    for (int k = 0; k <= deg; ++k) {
      q[k] *= scale;
      scale *= span;
    }
  }

  int qdeg = deg;
  while (qdeg > 0 && std::abs(q[qdeg]) < 1e-13 * q.cwiseAbs().maxCoeff()) {
    --qdeg;
  }
  if (qdeg <= 0) {
    return roots;
  }

  if (qdeg == 1) {
    const double s = -q[0] / q[1];
    if (s >= -1e-9 && s <= 1.0 + 1e-9) {
      roots.push_back(lo + std::clamp(s, 0.0, 1.0) * span);
    }
    return roots;
  }

  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(qdeg, qdeg);
  for (int i = 1; i < qdeg; ++i) {
    companion(i, i - 1) = 1.0;
  }
  for (int i = 0; i < qdeg; ++i) {
    companion(i, qdeg - 1) = -q[i] / q[qdeg];
  }
  const Eigen::VectorXcd eig = companion.eigenvalues();

  const Eigen::VectorXd dq = polyDerivative(q);
  for (int i = 0; i < eig.size(); ++i) {
    if (std::abs(eig[i].imag()) > 1e-8 * (1.0 + std::abs(eig[i].real()))) {
      continue;
    }
    double s = eig[i].real();
    if (s < -1e-6 || s > 1.0 + 1e-6) {
      continue;
    }
    for (int it = 0; it < 3; ++it) {
      const double f = polyVal(q, s);
      const double df = polyVal(dq, s);
      if (std::abs(df) < 1e-300) {
        break;
      }
      const double step = f / df;
      if (!std::isfinite(step)) {
        break;
      }
      s -= step;
    }
    s = std::clamp(s, 0.0, 1.0);
    roots.push_back(lo + s * span);
  }

  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [span](double a, double b) {
                            return std::abs(a - b) < 1e-10 * (1.0 + span);
                          }),
              roots.end());
  return roots;
}

}  // namespace kinoplan

#endif
