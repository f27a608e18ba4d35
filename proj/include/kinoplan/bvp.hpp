#ifndef KINOPLAN_BVP_HPP
#define KINOPLAN_BVP_HPP

#include <array>
#include <cmath>
#include <limits>

#include "kinoplan/poly_roots.hpp"
#include "kinoplan/trajectory.hpp"

namespace kinoplan {

// Goal set for steering: position and velocity pinned, acceleration free or
// pinned per axis.
struct GoalRegion {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();
  std::array<bool, 3> acceleration_free = {true, true, true};
  double tolerance = 0.0;

  static GoalRegion exact(const FlatState &x) {
    GoalRegion g;
    g.position = x.position;
    g.velocity = x.velocity;
    g.acceleration = x.acceleration;
    g.acceleration_free = {false, false, false};
    return g;
  }
};

struct SteerResult {
  Trajectory trajectory;
  double tau = 0.0;
  double cost = std::numeric_limits<double>::infinity();
  bool feasible_derivatives = false;
};

namespace bvp_detail {

// Jerk-energy numerator on one axis: int_0^tau jerk^2 dt = N(tau) / tau^5
// for the energy-optimal quintic through both full states.
inline void energyNumerator(double p0, double v0, double a0, double p1,
                            double v1, double a1, double n[5]) {
  const double dp = p0 - p1;
  n[0] = 720.0 * dp * dp;
  n[1] = 720.0 * dp * (v0 + v1);
  n[2] = 24.0 * (5.0 * (a0 - a1) * dp + 8.0 * v0 * v0 + 14.0 * v0 * v1 +
                 8.0 * v1 * v1);
  n[3] = 24.0 * (3.0 * a0 * v0 + 2.0 * a0 * v1 - 2.0 * a1 * v0 -
                 3.0 * a1 * v1);
  n[4] = 3.0 * (3.0 * a0 * a0 - 2.0 * a0 * a1 + 3.0 * a1 * a1);
}

// Same with the end acceleration eliminated at its optimum.
inline void energyNumeratorFreeAcc(double p0, double v0, double a0, double p1,
                                   double v1, double n[5]) {
  const double dp = p0 - p1;
  n[0] = 320.0 * dp * dp;
  n[1] = 80.0 * dp * (5.0 * v0 + 3.0 * v1);
  n[2] = 16.0 * (5.0 * a0 * dp + 8.0 * v0 * v0 + 9.0 * v0 * v1 +
                 3.0 * v1 * v1);
  n[3] = 8.0 * a0 * (7.0 * v0 + 3.0 * v1);
  n[4] = 8.0 * a0 * a0;
}

// Energy-optimal end acceleration for the free-acc boundary problem.
inline double optimalEndAcc(double p0, double v0, double a0, double p1,
                            double v1, double tau) {
  return (a0 * tau * tau + 20.0 * (p0 - p1) +
          4.0 * tau * (2.0 * v0 + 3.0 * v1)) /
         (3.0 * tau * tau);
}

}  // namespace bvp_detail

// The unique quintic matching both full states over duration tau; it is the
// minimum-jerk-energy interpolant among all trajectories with those
// boundaries.
inline Piece quinticFromBoundary(const FlatState &x0, const FlatState &x1,
                                 double tau) {
  if (!(tau > 0.0)) {
    throw std::domain_error("quinticFromBoundary: tau must be positive");
  }
  const double t2 = tau * tau;
  const double t3 = t2 * tau;
  const double t4 = t3 * tau;
  const double t5 = t4 * tau;
  Eigen::Matrix3Xd c(3, 6);
  for (int ax = 0; ax < 3; ++ax) {
    const double p0 = x0.position[ax], v0 = x0.velocity[ax],
                 a0 = x0.acceleration[ax];
    const double p1 = x1.position[ax], v1 = x1.velocity[ax],
                 a1 = x1.acceleration[ax];
    c(ax, 0) = p0;
    c(ax, 1) = v0;
    c(ax, 2) = 0.5 * a0;
    c(ax, 3) = (-3.0 * a0 * t2 + a1 * t2 - 20.0 * p0 + 20.0 * p1 -
                12.0 * tau * v0 - 8.0 * tau * v1) /
               (2.0 * t3);
    c(ax, 4) = (1.5 * a0 * t2 - a1 * t2 + 15.0 * p0 - 15.0 * p1 +
                8.0 * tau * v0 + 7.0 * tau * v1) /
               t4;
    c(ax, 5) = (-a0 * t2 + a1 * t2 - 12.0 * p0 + 12.0 * p1 - 6.0 * tau * v0 -
                6.0 * tau * v1) /
               (2.0 * t5);
  }
  return Piece(c, tau);
}

// Fixed-duration steering to a goal region: free-acc axes take their
// energy-optimal end acceleration.
inline Piece quinticToRegion(const FlatState &x0, const GoalRegion &goal,
                             double tau) {
  FlatState x1;
  x1.position = goal.position;
  x1.velocity = goal.velocity;
  for (int ax = 0; ax < 3; ++ax) {
    x1.acceleration[ax] =
        goal.acceleration_free[ax]
            ? bvp_detail::optimalEndAcc(x0.position[ax], x0.velocity[ax],
                                        x0.acceleration[ax], goal.position[ax],
                                        goal.velocity[ax], tau)
            : goal.acceleration[ax];
  }
  return quinticFromBoundary(x0, x1, tau);
}

class BvpSolver {
 public:
  explicit BvpSolver(double rho) : rho_(rho) {
    if (!(rho_ > 0.0)) {
      throw std::invalid_argument("BvpSolver: rho must be positive");
    }
  }

  double rho() const { return rho_; }

  // Cost rho*tau + 1/2 * int ||jerk||^2 of the optimal fixed-tau connection.
  double costAt(const FlatState &x0, const GoalRegion &goal,
                double tau) const {
    double num[5];
    double total = 0.0;
    for (int ax = 0; ax < 3; ++ax) {
      axisNumerator(x0, goal, ax, num);
      total += polyVal5(num, tau);
    }
    const double t5 = tau * tau * tau * tau * tau;
    return rho_ * tau + 0.5 * total / t5;
  }

  double costAt(const FlatState &x0, const FlatState &x1, double tau) const {
    return costAt(x0, GoalRegion::exact(x1), tau);
  }

  // Optimal transition time: positive real stationary points of the cost in
  // tau (roots of a degree-6 polynomial), with a bracketed scan fallback.
  double optimalTau(const FlatState &x0, const GoalRegion &goal) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(7);
    g[6] = rho_;
    double num[5];
    bool degenerate = true;
    for (int ax = 0; ax < 3; ++ax) {
      axisNumerator(x0, goal, ax, num);
      for (int k = 0; k < 5; ++k) {
        g[k] += 0.5 * static_cast<double>(k - 5) * num[k];
        if (std::abs(num[k]) > 1e-12) {
          degenerate = false;
        }
      }
    }
    if (degenerate) {
      return kTauMin;
    }

    // Cap for the root search; expand until the leading term dominates.
    const double dist = (x0.position - goal.position).norm();
    const double vmag = x0.velocity.norm() + goal.velocity.norm();
    const double amag = x0.acceleration.norm() + goal.acceleration.norm();
    double cap = std::max({1.0,
                           3.0 * std::pow(1800.0 * dist * dist / rho_, 1.0 / 6.0),
                           3.0 * std::pow(300.0 * vmag * vmag / rho_, 0.25),
                           3.0 * std::sqrt(3.0 * amag / std::sqrt(rho_))});
    for (int tries = 0; tries < 40; ++tries) {
      if (polyVal(g, cap) > 0.0) {
        break;
      }
      cap *= 2.0;
    }

    double best_tau = 0.0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (double r : realRootsInInterval(g, kTauMin, cap)) {
      const double c = costAt(x0, goal, r);
      if (c < best_cost) {
        best_cost = c;
        best_tau = r;
      }
    }
    if (best_tau > 0.0) {
      return best_tau;
    }

    // No admissible stationary point: coarse scan + golden-section refine.
    double lo = kTauMin, hi = cap;
    double best = lo;
    best_cost = costAt(x0, goal, lo);
    for (int i = 1; i <= 64; ++i) {
      const double t = lo + (hi - lo) * i / 64.0;
      const double c = costAt(x0, goal, t);
      if (c < best_cost) {
        best_cost = c;
        best = t;
      }
    }
    double a = std::max(lo, best - (hi - lo) / 64.0);
    double b = std::min(hi, best + (hi - lo) / 64.0);
    constexpr double kInvPhi = 0.6180339887498949;
    double x1g = b - kInvPhi * (b - a);
    double x2g = a + kInvPhi * (b - a);
    double f1 = costAt(x0, goal, x1g), f2 = costAt(x0, goal, x2g);
    for (int i = 0; i < 60; ++i) {
      if (f1 < f2) {
        b = x2g;
        x2g = x1g;
        f2 = f1;
        x1g = b - kInvPhi * (b - a);
        f1 = costAt(x0, goal, x1g);
      } else {
        a = x1g;
        x1g = x2g;
        f1 = f2;
        x2g = a + kInvPhi * (b - a);
        f2 = costAt(x0, goal, x2g);
      }
    }
    return 0.5 * (a + b);
  }

  // Unconstrained optimum between two full states.
  SteerResult solveFixedBvp(const FlatState &x0, const FlatState &x1) const {
    return solveToRegion(x0, GoalRegion::exact(x1));
  }

  SteerResult solveToRegion(const FlatState &x0, const GoalRegion &goal) const {
    SteerResult r;
    r.tau = optimalTau(x0, goal);
    r.trajectory = makeTrajectory(x0, goal, r.tau);
    r.cost = r.trajectory.costTimeEnergy(rho_);
    r.feasible_derivatives = true;
    return r;
  }

  // Cheap cost query (no trajectory construction); the planner's edge metric.
  double optimalCost(const FlatState &x0, const FlatState &x1) const {
    const GoalRegion g = GoalRegion::exact(x1);
    return costAt(x0, g, optimalTau(x0, g));
  }

  double optimalCostToRegion(const FlatState &x0, const GoalRegion &goal) const {
    return costAt(x0, goal, optimalTau(x0, goal));
  }

  // Steering with derivative feasibility: stretch the duration geometrically
  // and re-solve the fixed-duration problem until the edge fits the box
  // limits, or give up.
  SteerResult steerWithLimits(const FlatState &x0, const FlatState &x1,
                              const Limits &lim) const {
    return steerToRegion(x0, GoalRegion::exact(x1), lim);
  }

  SteerResult steerToRegion(const FlatState &x0, const GoalRegion &goal,
                            const Limits &lim) const {
    SteerResult r;
    r.tau = optimalTau(x0, goal);
    for (int it = 0; it <= kMaxStretch; ++it) {
      r.trajectory = makeTrajectory(x0, goal, r.tau);
      if (r.trajectory.withinLimits(lim)) {
        r.cost = r.trajectory.costTimeEnergy(rho_);
        r.feasible_derivatives = true;
        return r;
      }
      r.tau *= kStretchFactor;
    }
    r.tau /= kStretchFactor;
    r.cost = r.trajectory.costTimeEnergy(rho_);
    r.feasible_derivatives = false;
    return r;
  }

  static constexpr double kTauMin = 1e-3;
  static constexpr double kStretchFactor = 1.2;
  static constexpr int kMaxStretch = 10;

 private:
  static void axisNumerator(const FlatState &x0, const GoalRegion &goal,
                            int ax, double n[5]) {
    if (goal.acceleration_free[ax]) {
      bvp_detail::energyNumeratorFreeAcc(x0.position[ax], x0.velocity[ax],
                                         x0.acceleration[ax],
                                         goal.position[ax], goal.velocity[ax],
                                         n);
    } else {
      bvp_detail::energyNumerator(x0.position[ax], x0.velocity[ax],
                                  x0.acceleration[ax], goal.position[ax],
                                  goal.velocity[ax], goal.acceleration[ax], n);
    }
  }

  static double polyVal5(const double n[5], double tau) {
    return n[0] + tau * (n[1] + tau * (n[2] + tau * (n[3] + tau * n[4])));
  }

  Trajectory makeTrajectory(const FlatState &x0, const GoalRegion &goal,
                            double tau) const {
    std::vector<Piece> pieces;
    pieces.push_back(quinticToRegion(x0, goal, tau));
    return Trajectory(std::move(pieces));
  }

  double rho_;
};

}  // namespace kinoplan

#endif
