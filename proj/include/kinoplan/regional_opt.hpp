#ifndef KINOPLAN_REGIONAL_OPT_HPP
#define KINOPLAN_REGIONAL_OPT_HPP

#include <optional>

#include "kinoplan/grid_map.hpp"
#include "kinoplan/spline_qp.hpp"

namespace kinoplan {

struct RegionalConfig {
  int division_count = 0;  // <= 0: pick so pieces last ~0.5 s, clamped 4..12
  int max_iterations = 10;
  double time_stretch = 1.2;
  // Deformation needs derivative headroom: the incoming seed usually rides
  // the limits, so the schedule is pre-stretched until the seed sits at this
  // fraction of each limit, and later stretches aim for it too.
  double limit_headroom = 0.85;
  // Attractor distance beyond the free-path midpoint; by default 1.5x the
  // grid inflation radius so the dragged curve clears inflated obstacles.
  double attractor_margin = 0.45;
  // Segments appended to each side of a collision run's window. Wider
  // windows spread the lateral move over more time, keeping jerk down.
  int window_extension = 1;
  int astar_padding_cells = 10;
  CostWeights weights{100.0, 0.05, 1.0, 15.0};

  int pickDivision(double duration) const {
    if (division_count > 0) {
      return division_count;
    }
    return std::clamp(static_cast<int>(std::round(duration / 0.5)), 4, 12);
  }
};

struct RegionalResult {
  bool success = false;
  Trajectory trajectory;
  int iterations = 0;
  std::vector<AttractingPoint> attractors;
};

// Per-iteration snapshot, recorded on request for visualization dumps.
struct RegionalTraceEntry {
  Trajectory trajectory;
  std::vector<AttractingPoint> attractors;
  int collision_runs = 0;
  bool limits_ok = false;
  double stretch_applied = 0.0;
};

// Extend a collision window outward by one segment on each side, expressed on
// the divided trajectory's knot grid.
inline std::pair<double, double> attractorWindow(
    const std::vector<double> &durations, double t_start, double t_end,
    int extension = 1) {
  std::vector<double> knots(durations.size() + 1, 0.0);
  for (std::size_t i = 0; i < durations.size(); ++i) {
    knots[i + 1] = knots[i] + durations[i];
  }
  int first = 0, last = static_cast<int>(durations.size()) - 1;
  for (std::size_t i = 0; i < durations.size(); ++i) {
    if (t_start < knots[i + 1]) {
      first = static_cast<int>(i);
      break;
    }
  }
  for (int i = static_cast<int>(durations.size()) - 1; i >= 0; --i) {
    if (t_end > knots[i]) {
      last = i;
      break;
    }
  }
  first = std::max(0, first - extension);
  last = std::min(static_cast<int>(durations.size()) - 1, last + extension);
  return {knots[first], knots[last + 1]};
}

// Attracting point for one collision run of a steering edge: local grid
// search around the run, then a target placed past the free path's midpoint
// as seen from the collision midpoint.
inline std::optional<AttractingPoint> selectAttractorFrontend(
    const CollisionInterval &interval, double dt_check, const Trajectory &traj,
    const OccupancyGrid &grid, const RegionalConfig &config,
    const std::vector<double> &durations) {
  const double T = traj.totalDuration();
  const Vec3 p1 = traj.eval(std::max(0.0, interval.t_start - dt_check), 0);
  const Vec3 p2 = traj.eval(std::min(T, interval.t_end + dt_check), 0);
  const Vec3 pc = interval.p_mid;

  const Vector3i c1 = grid.worldToCell(p1);
  const Vector3i c2 = grid.worldToCell(p2);
  LocalAStarResult path;
  for (int pad_cells = config.astar_padding_cells; pad_cells <= 4 * config.astar_padding_cells;
       pad_cells *= 2) {
    const Vector3i pad = Vector3i::Constant(pad_cells);
    path = localAStar(grid, p1, p2, c1.cwiseMin(c2) - pad,
                      c1.cwiseMax(c2) + pad);
    if (path.success()) {
      break;
    }
  }
  if (!path.success()) {
    return std::nullopt;
  }

  // Midpoint of the free path by arc length.
  Vec3 pm = path.path.front();
  const double half = 0.5 * pathLength(path.path);
  double walked = 0.0;
  for (std::size_t i = 1; i < path.path.size(); ++i) {
    const double step = (path.path[i] - path.path[i - 1]).norm();
    if (walked + step >= half) {
      const double s = (step > 0.0) ? (half - walked) / step : 0.0;
      pm = path.path[i - 1] + s * (path.path[i] - path.path[i - 1]);
      break;
    }
    walked += step;
  }

  Vec3 dir = pm - pc;
  const double dist = dir.norm();
  if (dist < 1e-9) {
    dir = Vec3(0.0, 0.0, 1.0);
  } else {
    dir /= dist;
  }

  AttractingPoint ap;
  ap.position = pc + dir * (dist + config.attractor_margin);
  std::tie(ap.t_start, ap.t_end) = attractorWindow(
      durations, interval.t_start, interval.t_end, config.window_extension);
  return ap;
}

// Collision runs separated by a free sliver narrower than the vehicle
// diameter are one obstacle region for deformation purposes; treating them
// separately leaves endpoints in pockets no local path can escape.
inline std::vector<CollisionInterval> mergeNarrowGaps(
    const CollisionReport &report, const Trajectory &traj,
    double min_gap_distance) {
  std::vector<CollisionInterval> merged;
  for (const CollisionInterval &iv : report.intervals) {
    if (!merged.empty()) {
      const Vec3 prev_exit = traj.eval(merged.back().t_end, 0);
      const Vec3 next_entry = traj.eval(iv.t_start, 0);
      if ((next_entry - prev_exit).norm() < min_gap_distance) {
        merged.back().t_end = iv.t_end;
        merged.back().t_mid =
            0.5 * (merged.back().t_start + merged.back().t_end);
        merged.back().p_mid = traj.eval(merged.back().t_mid, 0);
        continue;
      }
    }
    merged.push_back(iv);
  }
  return merged;
}

// Iterative closed-form deformation of a colliding steering edge: divide,
// solve, then either stretch time (derivative violations) or accumulate
// attracting points (remaining collisions) and re-solve.
inline RegionalResult regionalOptimize(
    const FlatState &x1, const FlatState &x2, const Trajectory &seed,
    const OccupancyGrid &grid, const Limits &limits,
    const RegionalConfig &config,
    std::vector<RegionalTraceEntry> *trace = nullptr) {
  RegionalResult result;
  const double dt_check = grid.resolution() / limits.v_max;

  // Divide the seed uniformly per piece to add deformation freedom.
  std::vector<Piece> divided;
  for (const Piece &p : seed.pieces()) {
    const int j = config.pickDivision(p.duration());
    for (Piece &sub : p.splitUniform(j)) {
      divided.push_back(std::move(sub));
    }
  }
  Trajectory reference(std::move(divided));

  SplineProblem problem = SplineProblem::fromReference(reference, config.weights);
  problem.boundary_start = x1;
  problem.boundary_end = x2;

  auto headroomStretch = [&](const Trajectory &traj) {
    const double target = config.limit_headroom;
    const double rv = traj.derivativeExtrema(1) / (target * limits.v_max);
    const double ra = traj.derivativeExtrema(2) / (target * limits.a_max);
    const double rj = traj.derivativeExtrema(3) / (target * limits.j_max);
    return std::max({rv, std::sqrt(ra), std::cbrt(rj)});
  };

  double pending_stretch = headroomStretch(seed);
  if (pending_stretch <= 1.0) {
    pending_stretch = 0.0;
  }
  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    result.iterations = iter;
    if (pending_stretch > 0.0) {
      const double gamma = pending_stretch;
      pending_stretch = 0.0;
      reference = reference.timeStretched(gamma);
      const FlatState bs = problem.boundary_start;
      const FlatState be = problem.boundary_end;
      auto attractors = problem.attractors;
      for (AttractingPoint &ap : attractors) {
        ap.t_start *= gamma;
        ap.t_end *= gamma;
      }
      problem = SplineProblem::fromReference(reference, config.weights);
      problem.boundary_start = bs;
      problem.boundary_end = be;
      problem.attractors = std::move(attractors);
      // Endpoint velocities/accelerations stay those of x1/x2; stretching
      // only relaxes the interior schedule.
    }

    const SplineSolution sol = solveClosedForm(problem);
    const bool limits_ok = sol.trajectory.withinLimits(limits);
    const CollisionReport report =
        grid.checkTrajectory(sol.trajectory, dt_check);
    if (trace != nullptr) {
      trace->push_back({sol.trajectory, problem.attractors,
                        static_cast<int>(report.intervals.size()), limits_ok,
                        0.0});
    }

    if (limits_ok && report.clear()) {
      result.success = true;
      result.trajectory = sol.trajectory;
      result.attractors = problem.attractors;
      return result;
    }
    if (!limits_ok) {
      // Stretch the whole schedule at least geometrically, and enough that
      // a pure retiming of this iterate would sit at the headroom fraction
      // of the box limits.
      pending_stretch =
          std::max(headroomStretch(sol.trajectory), config.time_stretch);
    }
    const std::vector<CollisionInterval> regions = mergeNarrowGaps(
        report, sol.trajectory, 2.0 * grid.inflationRadius());
    for (const CollisionInterval &iv : regions) {
      const auto ap = selectAttractorFrontend(iv, dt_check, sol.trajectory,
                                              grid, config, problem.durations);
      if (!ap.has_value()) {
        result.attractors = problem.attractors;
        return result;  // local search failed; abort this edge
      }
      // A region whose target lands where an existing point already pulls is
      // the same collision persisting: escalate that point instead of
      // stacking a near-duplicate. Shifted collisions get their own point so
      // accumulated pulls shape the whole detour.
      AttractingPoint *persistent = nullptr;
      for (AttractingPoint &prev : problem.attractors) {
        const bool windows_overlap =
            iv.t_mid >= prev.t_start && iv.t_mid <= prev.t_end;
        if (windows_overlap && (prev.position - ap->position).norm() <
                                   grid.inflationRadius()) {
          persistent = &prev;
          break;
        }
      }
      if (persistent != nullptr) {
        persistent->position = ap->position;
        persistent->weight = std::min(8.0, persistent->weight * 1.6);
      } else {
        problem.attractors.push_back(*ap);
      }
    }
  }
  result.attractors = problem.attractors;
  return result;
}

}  // namespace kinoplan

#endif
