#ifndef KINOPLAN_SPLINE_QP_HPP
#define KINOPLAN_SPLINE_QP_HPP

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "kinoplan/trajectory.hpp"

namespace kinoplan {

// A dragging target: the trajectory portion inside the time window is pulled
// toward the (constant) position by a quadratic penalty. The weight scales
// this point's pull relative to lambda_c; iteration loops escalate it when a
// collision region persists.
struct AttractingPoint {
  Vec3 position = Vec3::Zero();
  double t_start = 0.0;
  double t_end = 0.0;
  double weight = 1.0;
};

// Equality-constrained quadratic program over a j-piece quintic spline, one
// objective per axis sharing the same quadratic term:
//   lambda_s * int ||jerk||^2  +  lambda_r * int ||p - p_ref||^2
//     + lambda_c * sum_ap int_window ||p - p_ap||^2
// subject to pinned endpoint derivatives (position through acceleration) and
// acceleration-continuous interior knots.
struct SplineProblem {
  std::vector<double> durations;
  CostWeights weights;
  Eigen::Matrix3Xd ref_coeffs;  // 3 x 6j, ascending powers per segment
  std::vector<AttractingPoint> attractors;
  FlatState boundary_start;
  FlatState boundary_end;
  // Interior knots whose position is additionally pinned (knot index 1..j-1).
  std::vector<std::pair<int, Vec3>> pinned_knots;

  int pieceCount() const { return static_cast<int>(durations.size()); }
  double totalDuration() const {
    double total = 0.0;
    for (double d : durations) {
      total += d;
    }
    return total;
  }

  // Build the reference (and boundary) from a trajectory whose pieces have
  // degree <= 5; lower degrees are zero-padded.
  static SplineProblem fromReference(const Trajectory &ref,
                                     const CostWeights &weights) {
    SplineProblem p;
    p.weights = weights;
    p.ref_coeffs = Eigen::Matrix3Xd::Zero(3, 6 * ref.pieceCount());
    for (int i = 0; i < ref.pieceCount(); ++i) {
      const Piece &piece = ref.piece(i);
      if (piece.degree() > 5) {
        throw std::invalid_argument("SplineProblem: reference degree > 5");
      }
      p.durations.push_back(piece.duration());
      p.ref_coeffs.block(0, 6 * i, 3, piece.degree() + 1) = piece.coeffs();
    }
    p.boundary_start = ref.startState();
    p.boundary_end = ref.endState();
    return p;
  }
};

struct SplineSolution {
  Eigen::Matrix3Xd coeffs;  // 3 x 6j
  Trajectory trajectory;
  double objective_value = 0.0;
};

namespace qp_detail {

inline double derivFactor(int power, int order) {
  double f = 1.0;
  for (int m = 0; m < order; ++m) {
    f *= static_cast<double>(power - m);
  }
  return (power >= order) ? f : 0.0;
}

}  // namespace qp_detail

// Block-diagonal Gram matrix of the order-th derivative of the quintic basis:
// block i entry (a,b) = int over the segment window of D^k t^a * D^k t^b dt.
inline Eigen::MatrixXd gramMatrix(
    const std::vector<double> &durations, int order,
    const std::vector<std::pair<double, double>> &windows) {
  const int j = static_cast<int>(durations.size());
  if (static_cast<int>(windows.size()) != j) {
    throw std::invalid_argument("gramMatrix: one window per segment required");
  }
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(6 * j, 6 * j);
  for (int i = 0; i < j; ++i) {
    const auto [w0, w1] = windows[i];
    if (w0 < -1e-12 || w1 > durations[i] + 1e-9 || w0 > w1 + 1e-12) {
      throw std::invalid_argument("gramMatrix: window outside segment");
    }
    if (w1 - w0 <= 0.0) {
      continue;
    }
    for (int a = order; a < 6; ++a) {
      for (int b = order; b < 6; ++b) {
        const int p = a + b - 2 * order + 1;
        const double integral =
            (std::pow(w1, p) - std::pow(w0, p)) / static_cast<double>(p);
        Q(6 * i + a, 6 * i + b) = qp_detail::derivFactor(a, order) *
                                  qp_detail::derivFactor(b, order) * integral;
      }
    }
  }
  return Q;
}

inline std::vector<std::pair<double, double>> fullWindows(
    const std::vector<double> &durations) {
  std::vector<std::pair<double, double>> w;
  w.reserve(durations.size());
  for (double d : durations) {
    w.emplace_back(0.0, d);
  }
  return w;
}

// Local sub-windows of a global time window, one per segment.
inline std::vector<std::pair<double, double>> windowsFromGlobal(
    const std::vector<double> &durations, double t_start, double t_end) {
  std::vector<std::pair<double, double>> w;
  w.reserve(durations.size());
  double knot = 0.0;
  for (double d : durations) {
    const double lo = std::clamp(t_start - knot, 0.0, d);
    const double hi = std::clamp(t_end - knot, 0.0, d);
    w.emplace_back(lo, std::max(lo, hi));
    knot += d;
  }
  return w;
}

struct AssembledObjective {
  Eigen::MatrixXd Q;                    // shared across axes
  Eigen::Matrix<double, 3, Eigen::Dynamic> q;  // one row per axis
  Vec3 constant = Vec3::Zero();

  double value(const Eigen::Matrix3Xd &coeffs) const {
    double total = 0.0;
    for (int ax = 0; ax < 3; ++ax) {
      const Eigen::VectorXd c = coeffs.row(ax).transpose();
      total += c.dot(Q * c) - 2.0 * c.dot(q.row(ax).transpose()) +
               constant[ax];
    }
    return total;
  }
};

inline AssembledObjective assembleObjective(const SplineProblem &problem) {
  const int j = problem.pieceCount();
  if (j < 1) {
    throw std::invalid_argument("assembleObjective: empty problem");
  }
  const auto &w = problem.weights;
  if (w.lambda_s <= 0.0 && w.lambda_r <= 0.0 && w.lambda_c <= 0.0) {
    throw std::invalid_argument("assembleObjective: all weights are zero");
  }
  const double T = problem.totalDuration();

  AssembledObjective out;
  out.Q = Eigen::MatrixXd::Zero(6 * j, 6 * j);
  out.q = Eigen::MatrixXd::Zero(3, 6 * j);

  if (w.lambda_s > 0.0) {
    out.Q += w.lambda_s *
             gramMatrix(problem.durations, 3, fullWindows(problem.durations));
  }
  if (w.lambda_r > 0.0) {
    const Eigen::MatrixXd Qr =
        gramMatrix(problem.durations, 0, fullWindows(problem.durations));
    out.Q += w.lambda_r * Qr;
    for (int ax = 0; ax < 3; ++ax) {
      const Eigen::VectorXd cref = problem.ref_coeffs.row(ax).transpose();
      out.q.row(ax) += w.lambda_r * (Qr * cref).transpose();
      out.constant[ax] += w.lambda_r * cref.dot(Qr * cref);
    }
  }
  if (w.lambda_c > 0.0) {
    for (const AttractingPoint &ap : problem.attractors) {
      if (!(ap.t_start < ap.t_end) || ap.t_start < -1e-9 ||
          ap.t_end > T + 1e-9) {
        throw std::invalid_argument("AttractingPoint: bad time window");
      }
      const Eigen::MatrixXd Qc = gramMatrix(
          problem.durations, 0,
          windowsFromGlobal(problem.durations, ap.t_start, ap.t_end));
      const double wc = w.lambda_c * ap.weight;
      out.Q += wc * Qc;
      Eigen::VectorXd cap = Eigen::VectorXd::Zero(6 * j);
      for (int ax = 0; ax < 3; ++ax) {
        for (int i = 0; i < j; ++i) {
          cap[6 * i] = ap.position[ax];  // constant polynomial
        }
        out.q.row(ax) += wc * (Qc * cap).transpose();
        out.constant[ax] += wc * cap.dot(Qc * cap);
      }
    }
  }
  return out;
}

// Boundary mapping of one quintic segment: coefficients ->
// [p(0), v(0), a(0), p(T), v(T), a(T)].
inline Eigen::Matrix<double, 6, 6> boundaryMap(double T) {
  Eigen::Matrix<double, 6, 6> M = Eigen::Matrix<double, 6, 6>::Zero();
  M(0, 0) = 1.0;
  M(1, 1) = 1.0;
  M(2, 2) = 2.0;
  for (int k = 0; k < 6; ++k) {
    M(3, k) = std::pow(T, k);
    M(4, k) = k * ((k >= 1) ? std::pow(T, k - 1) : 0.0);
    M(5, k) = k * (k - 1) * ((k >= 2) ? std::pow(T, k - 2) : 0.0);
  }
  return M;
}

// Closed-form equality-constrained solve: substitute coefficients by per-knot
// derivatives (which encodes continuity exactly), split knot derivatives into
// fixed and free, and solve the strictly convex reduced problem with one
// symmetric factorization shared by the three axes.
inline SplineSolution solveClosedForm(const SplineProblem &problem) {
  const int j = problem.pieceCount();
  const AssembledObjective obj = assembleObjective(problem);

  const int n_knot = 3 * (j + 1);
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(6 * j, n_knot);
  for (int i = 0; i < j; ++i) {
    const double T = problem.durations[i];
    if (!(T > 1e-9)) {
      throw std::runtime_error("solveClosedForm: duration underflow in segment " +
                               std::to_string(i));
    }
    const Eigen::Matrix<double, 6, 6> Minv = boundaryMap(T).inverse();
    if (!Minv.allFinite()) {
      throw std::runtime_error("solveClosedForm: singular boundary map in segment " +
                               std::to_string(i));
    }
    K.block(6 * i, 3 * i, 6, 3) = Minv.leftCols<3>();
    K.block(6 * i, 3 * (i + 1), 6, 3) = Minv.rightCols<3>();
  }

  std::vector<bool> fixed(n_knot, false);
  Eigen::Matrix3Xd fixed_values = Eigen::Matrix3Xd::Zero(3, n_knot);
  for (int m = 0; m < 3; ++m) {
    fixed[m] = true;
    fixed[n_knot - 3 + m] = true;
  }
  fixed_values.col(0) = problem.boundary_start.position;
  fixed_values.col(1) = problem.boundary_start.velocity;
  fixed_values.col(2) = problem.boundary_start.acceleration;
  fixed_values.col(n_knot - 3) = problem.boundary_end.position;
  fixed_values.col(n_knot - 2) = problem.boundary_end.velocity;
  fixed_values.col(n_knot - 1) = problem.boundary_end.acceleration;
  for (const auto &[knot, pos] : problem.pinned_knots) {
    if (knot <= 0 || knot >= j) {
      throw std::invalid_argument("pinned knot index out of range");
    }
    fixed[3 * knot] = true;
    fixed_values.col(3 * knot) = pos;
  }

  std::vector<int> free_idx, fixed_idx;
  for (int m = 0; m < n_knot; ++m) {
    (fixed[m] ? fixed_idx : free_idx).push_back(m);
  }

  const Eigen::MatrixXd R = K.transpose() * obj.Q * K;
  const int nf = static_cast<int>(free_idx.size());
  const int nx = static_cast<int>(fixed_idx.size());
  Eigen::MatrixXd Rpp(nf, nf), Rpf(nf, nx);
  for (int r = 0; r < nf; ++r) {
    for (int cidx = 0; cidx < nf; ++cidx) {
      Rpp(r, cidx) = R(free_idx[r], free_idx[cidx]);
    }
    for (int cidx = 0; cidx < nx; ++cidx) {
      Rpf(r, cidx) = R(free_idx[r], fixed_idx[cidx]);
    }
  }

  Eigen::LDLT<Eigen::MatrixXd> ldlt;
  if (nf > 0) {
    ldlt.compute(Rpp);
    if (ldlt.info() != Eigen::Success) {
      throw std::runtime_error("solveClosedForm: reduced system not factorizable");
    }
  }

  SplineSolution sol;
  sol.coeffs = Eigen::Matrix3Xd::Zero(3, 6 * j);
  for (int ax = 0; ax < 3; ++ax) {
    const Eigen::VectorXd g = K.transpose() * obj.q.row(ax).transpose();
    Eigen::VectorXd d = Eigen::VectorXd::Zero(n_knot);
    Eigen::VectorXd dF(nx);
    for (int m = 0; m < nx; ++m) {
      dF[m] = fixed_values(ax, fixed_idx[m]);
      d[fixed_idx[m]] = dF[m];
    }
    if (nf > 0) {
      Eigen::VectorXd gP(nf);
      for (int m = 0; m < nf; ++m) {
        gP[m] = g[free_idx[m]];
      }
      const Eigen::VectorXd dP = ldlt.solve(gP - Rpf * dF);
      for (int m = 0; m < nf; ++m) {
        d[free_idx[m]] = dP[m];
      }
    }
    sol.coeffs.row(ax) = (K * d).transpose();
  }

  std::vector<Piece> pieces;
  pieces.reserve(j);
  for (int i = 0; i < j; ++i) {
    pieces.emplace_back(sol.coeffs.block(0, 6 * i, 3, 6), problem.durations[i]);
  }
  sol.trajectory = Trajectory(std::move(pieces));
  sol.objective_value = obj.value(sol.coeffs);
  return sol;
}

}  // namespace kinoplan

#endif
