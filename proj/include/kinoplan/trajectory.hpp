#ifndef KINOPLAN_TRAJECTORY_HPP
#define KINOPLAN_TRAJECTORY_HPP

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "kinoplan/poly_roots.hpp"

namespace kinoplan {

using Vec3 = Eigen::Vector3d;

// Full flat-output state of the jerk-controlled vehicle model on one axis
// triple: position, velocity, acceleration.
struct FlatState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();

  FlatState() = default;
  FlatState(const Vec3 &p, const Vec3 &v, const Vec3 &a)
      : position(p), velocity(v), acceleration(a) {}

  bool allFinite() const {
    return position.allFinite() && velocity.allFinite() &&
           acceleration.allFinite();
  }
};

// Per-axis box bounds on the state derivatives and the control.
struct Limits {
  double v_max = 7.0;
  double a_max = 5.0;
  double j_max = 15.0;
};

struct CostWeights {
  double rho = 100.0;     // time weight against control energy
  double lambda_s = 0.0;  // smoothness
  double lambda_r = 0.0;  // resemblance to the reference
  double lambda_c = 0.0;  // attracting-point pull
};

// One polynomial segment: rows are the x/y/z axes, columns ascending powers
// of the segment-local time in [0, duration].
class Piece {
 public:
  Piece() = default;
  Piece(Eigen::Matrix3Xd coeffs, double duration)
      : coeffs_(std::move(coeffs)), duration_(duration) {
    if (!(duration_ > 0.0)) {
      throw std::invalid_argument("Piece: duration must be positive");
    }
  }

  int degree() const { return static_cast<int>(coeffs_.cols()) - 1; }
  double duration() const { return duration_; }
  const Eigen::Matrix3Xd &coeffs() const { return coeffs_; }

  // order 0..3 = position..jerk. Horner on the derivative coefficients.
  Vec3 eval(double t, int order = 0) const {
    Vec3 out = Vec3::Zero();
    const int n = degree();
    for (int k = n; k >= order; --k) {
      double fact = 1.0;
      for (int m = 0; m < order; ++m) {
        fact *= static_cast<double>(k - m);
      }
      out = out * t + fact * coeffs_.col(k);
    }
    return out;
  }

  FlatState stateAt(double t) const {
    return FlatState(eval(t, 0), eval(t, 1), eval(t, 2));
  }

  // Ascending-power coefficients of the order-th derivative on one axis.
  Eigen::VectorXd axisDerivativeCoeffs(int axis, int order) const {
    const int n = degree();
    if (order > n) {
      return Eigen::VectorXd::Zero(1);
    }
    Eigen::VectorXd d(n - order + 1);
    for (int k = order; k <= n; ++k) {
      double fact = 1.0;
      for (int m = 0; m < order; ++m) {
        fact *= static_cast<double>(k - m);
      }
      d[k - order] = coeffs_(axis, k) * fact;
    }
    return d;
  }

  // Exact integral of the squared order-th derivative summed over axes.
  double squaredDerivativeIntegral(int order) const {
    double total = 0.0;
    for (int axis = 0; axis < 3; ++axis) {
      const Eigen::VectorXd d = axisDerivativeCoeffs(axis, order);
      const int m = static_cast<int>(d.size());
      for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
          total += d[a] * d[b] * std::pow(duration_, a + b + 1) /
                   static_cast<double>(a + b + 1);
        }
      }
    }
    return total;
  }

  // Supremum of |d^order p / dt^order| over the segment and all axes.
  double maxAbsDerivative(int order) const {
    double best = 0.0;
    for (int axis = 0; axis < 3; ++axis) {
      const Eigen::VectorXd d = axisDerivativeCoeffs(axis, order);
      best = std::max(best, std::abs(polyVal(d, 0.0)));
      best = std::max(best, std::abs(polyVal(d, duration_)));
      const Eigen::VectorXd dd = polyDerivative(d);
      for (double r : realRootsInInterval(dd, 0.0, duration_)) {
        best = std::max(best, std::abs(polyVal(d, r)));
      }
    }
    return best;
  }

  // Re-expand the polynomial about a shifted local origin, same degree.
  Piece subPiece(double t0, double dur) const {
    const int n = degree();
    Eigen::Matrix3Xd shifted = coeffs_;
    // Taylor shift by synthetic division per axis.
    for (int axis = 0; axis < 3; ++axis) {
      Eigen::VectorXd w = coeffs_.row(axis).transpose();
      for (int k = 0; k <= n; ++k) {
        for (int i = n - 1; i >= k; --i) {
          w[i] += w[i + 1] * t0;
        }
        shifted(axis, k) = w[k];
      }
    }
    return Piece(shifted, dur);
  }

  std::vector<Piece> splitUniform(int parts) const {
    if (parts < 1) {
      throw std::invalid_argument("splitUniform: parts must be >= 1");
    }
    std::vector<Piece> out;
    out.reserve(parts);
    const double sub = duration_ / parts;
    for (int i = 0; i < parts; ++i) {
      out.push_back(subPiece(i * sub, sub));
    }
    return out;
  }

  // Gauss-Legendre arc length of the position curve.
  double arcLength() const {
    static constexpr int kNodes = 16;
    static const double kX[kNodes] = {
        -0.9894009349916499, -0.9445750230732326, -0.8656312023878318,
        -0.7554044083550030, -0.6178762444026438, -0.4580167776572274,
        -0.2816035507792589, -0.0950125098376374, 0.0950125098376374,
        0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
        0.7554044083550030,  0.8656312023878318,  0.9445750230732326,
        0.9894009349916499};
    static const double kW[kNodes] = {
        0.0271524594117541, 0.0622535239386479, 0.0951585116824928,
        0.1246289712555339, 0.1495959888165767, 0.1691565193950025,
        0.1826034150449236, 0.1894506104550685, 0.1894506104550685,
        0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
        0.1246289712555339, 0.0951585116824928, 0.0622535239386479,
        0.0271524594117541};
    double len = 0.0;
    const double h = 0.5 * duration_;
    for (int i = 0; i < kNodes; ++i) {
      len += kW[i] * eval(h * (kX[i] + 1.0), 1).norm();
    }
    return len * h;
  }

  // Piece evaluated on the stretched clock t -> t/gamma; positions are
  // preserved, derivatives shrink.
  Piece timeStretched(double gamma) const {
    Eigen::Matrix3Xd c = coeffs_;
    double s = 1.0;
    for (int k = 0; k < c.cols(); ++k) {
      c.col(k) *= s;
      s /= gamma;
    }
    return Piece(c, duration_ * gamma);
  }

 private:
  Eigen::Matrix3Xd coeffs_ = Eigen::Matrix3Xd::Zero(3, 1);
  double duration_ = 1.0;
};

// Ordered polynomial pieces; the universal plan representation.
class Trajectory {
 public:
  static constexpr double kKnotContinuityTol = 1e-6;

  Trajectory() = default;
  explicit Trajectory(std::vector<Piece> pieces, double start_time = 0.0)
      : pieces_(std::move(pieces)), start_time_(start_time) {}

  bool empty() const { return pieces_.empty(); }
  int pieceCount() const { return static_cast<int>(pieces_.size()); }
  const std::vector<Piece> &pieces() const { return pieces_; }
  const Piece &piece(int i) const { return pieces_.at(i); }
  double startTime() const { return start_time_; }

  void append(Piece p) { pieces_.push_back(std::move(p)); }
  void append(const Trajectory &other) {
    pieces_.insert(pieces_.end(), other.pieces_.begin(), other.pieces_.end());
  }

  double totalDuration() const {
    double total = 0.0;
    for (const auto &p : pieces_) {
      total += p.duration();
    }
    return total;
  }

  // Locate the piece containing local time t (relative to startTime).
  int locate(double &t) const {
    if (pieces_.empty()) {
      throw std::domain_error("Trajectory::locate on empty trajectory");
    }
    const double total = totalDuration();
    if (t < -1e-9 || t > total + 1e-9) {
      throw std::domain_error("Trajectory: time out of range");
    }
    t = std::clamp(t, 0.0, total);
    int idx = 0;
    while (idx + 1 < pieceCount() && t > pieces_[idx].duration()) {
      t -= pieces_[idx].duration();
      ++idx;
    }
    t = std::min(t, pieces_[idx].duration());
    return idx;
  }

  Vec3 eval(double t, int order = 0) const {
    double local = t;
    const int idx = locate(local);
    return pieces_[idx].eval(local, order);
  }

  FlatState stateAt(double t) const {
    return FlatState(eval(t, 0), eval(t, 1), eval(t, 2));
  }

  FlatState startState() const { return stateAt(0.0); }
  FlatState endState() const { return stateAt(totalDuration()); }

  // rho * T + 1/2 * integral of squared jerk, exact from coefficients.
  double costTimeEnergy(double rho) const {
    double cost = rho * totalDuration();
    for (const auto &p : pieces_) {
      cost += 0.5 * p.squaredDerivativeIntegral(3);
    }
    return cost;
  }

  double jerkIntegral() const {
    double total = 0.0;
    for (const auto &p : pieces_) {
      total += p.squaredDerivativeIntegral(3);
    }
    return total;
  }

  double derivativeExtrema(int order) const {
    double best = 0.0;
    for (const auto &p : pieces_) {
      best = std::max(best, p.maxAbsDerivative(order));
    }
    return best;
  }

  bool withinLimits(const Limits &lim, double slack = 1e-6) const {
    return derivativeExtrema(1) <= lim.v_max + slack &&
           derivativeExtrema(2) <= lim.a_max + slack &&
           derivativeExtrema(3) <= lim.j_max + slack;
  }

  double arcLength() const {
    double len = 0.0;
    for (const auto &p : pieces_) {
      len += p.arcLength();
    }
    return len;
  }

  // Max mismatch of position/velocity/acceleration across interior knots.
  double knotDiscontinuity() const {
    double worst = 0.0;
    for (int i = 0; i + 1 < pieceCount(); ++i) {
      for (int order = 0; order <= 2; ++order) {
        const Vec3 a = pieces_[i].eval(pieces_[i].duration(), order);
        const Vec3 b = pieces_[i + 1].eval(0.0, order);
        worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
      }
    }
    return worst;
  }

  Trajectory timeStretched(double gamma) const {
    std::vector<Piece> out;
    out.reserve(pieces_.size());
    for (const auto &p : pieces_) {
      out.push_back(p.timeStretched(gamma));
    }
    return Trajectory(std::move(out), start_time_);
  }

 private:
  std::vector<Piece> pieces_;
  double start_time_ = 0.0;
};

}  // namespace kinoplan

#endif
