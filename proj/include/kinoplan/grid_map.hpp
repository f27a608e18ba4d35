#ifndef KINOPLAN_GRID_MAP_HPP
#define KINOPLAN_GRID_MAP_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <queue>
#include <unordered_map>
#include <vector>

#include "kinoplan/trajectory.hpp"

namespace kinoplan {

using Eigen::Vector3i;

// Collision run of a trajectory against a grid, grouped from time-uniform
// samples. t_mid / p_mid are the run midpoint used for attractor selection.
struct CollisionInterval {
  double t_start = 0.0;
  double t_end = 0.0;
  double t_mid = 0.0;
  Vec3 p_mid = Vec3::Zero();
};

struct CollisionReport {
  std::vector<CollisionInterval> intervals;
  double dt = 0.0;
  bool clear() const { return intervals.empty(); }
};

// Axis-aligned voxel map. Out-of-bounds queries report occupied.
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(const Vec3 &origin, double resolution, const Vector3i &dims,
                double inflation_radius = 0.3)
      : origin_(origin),
        resolution_(resolution),
        dims_(dims),
        inflation_radius_(inflation_radius),
        bits_((static_cast<std::size_t>(dims.x()) * dims.y() * dims.z() + 63) /
                  64,
              0ull) {
    if (!(resolution_ > 0.0) || (dims.array() <= 0).any()) {
      throw std::invalid_argument("OccupancyGrid: bad resolution or dims");
    }
  }

  const Vec3 &origin() const { return origin_; }
  double resolution() const { return resolution_; }
  const Vector3i &dims() const { return dims_; }
  double inflationRadius() const { return inflation_radius_; }
  Vec3 maxCorner() const {
    return origin_ + resolution_ * dims_.cast<double>();
  }

  std::size_t cellCount() const {
    return static_cast<std::size_t>(dims_.x()) * dims_.y() * dims_.z();
  }

  bool inBounds(const Vector3i &c) const {
    return (c.array() >= 0).all() && c.x() < dims_.x() && c.y() < dims_.y() &&
           c.z() < dims_.z();
  }

  Vector3i worldToCell(const Vec3 &p) const {
    const Vec3 rel = (p - origin_) / resolution_;
    return Vector3i(static_cast<int>(std::floor(rel.x())),
                    static_cast<int>(std::floor(rel.y())),
                    static_cast<int>(std::floor(rel.z())));
  }

  Vec3 cellCenter(const Vector3i &c) const {
    return origin_ + resolution_ * (c.cast<double>() + Vec3::Constant(0.5));
  }

  bool occupiedCell(const Vector3i &c) const {
    if (!inBounds(c)) {
      return true;
    }
    const std::size_t idx = cellIndex(c);
    return (bits_[idx >> 6] >> (idx & 63)) & 1ull;
  }

  bool occupiedAt(const Vec3 &p) const { return occupiedCell(worldToCell(p)); }

  void setOccupied(const Vector3i &c, bool value = true) {
    if (!inBounds(c)) {
      return;
    }
    const std::size_t idx = cellIndex(c);
    if (value) {
      bits_[idx >> 6] |= (1ull << (idx & 63));
    } else {
      bits_[idx >> 6] &= ~(1ull << (idx & 63));
    }
  }

  // Mark every cell whose center lies inside the closed box [lo, hi].
  void fillBox(const Vec3 &lo, const Vec3 &hi, bool value = true) {
    const Vector3i a = worldToCell(lo);
    const Vector3i b = worldToCell(hi);
    for (int x = std::max(0, a.x()); x <= std::min(dims_.x() - 1, b.x()); ++x) {
      for (int y = std::max(0, a.y()); y <= std::min(dims_.y() - 1, b.y());
           ++y) {
        for (int z = std::max(0, a.z()); z <= std::min(dims_.z() - 1, b.z());
             ++z) {
          const Vector3i c(x, y, z);
          const Vec3 ctr = cellCenter(c);
          if ((ctr.array() >= lo.array()).all() &&
              (ctr.array() <= hi.array()).all()) {
            setOccupied(c, value);
          }
        }
      }
    }
  }

  std::size_t occupiedCount() const {
    std::size_t n = 0;
    for (std::uint64_t w : bits_) {
      n += static_cast<std::size_t>(__builtin_popcountll(w));
    }
    return n;
  }

  bool operator==(const OccupancyGrid &other) const {
    return origin_ == other.origin_ && resolution_ == other.resolution_ &&
           dims_ == other.dims_ &&
           inflation_radius_ == other.inflation_radius_ &&
           bits_ == other.bits_;
  }

  // Euclidean dilation by the inflation radius: a cell becomes occupied iff
  // some raw-occupied cell center lies within that distance of its center.
  OccupancyGrid inflate() const {
    OccupancyGrid out = *this;
    if (inflation_radius_ <= 0.0) {
      return out;
    }
    const int reach =
        static_cast<int>(std::floor(inflation_radius_ / resolution_ + 1e-9));
    std::vector<Vector3i> stencil;
    const double r2 =
        (inflation_radius_ / resolution_) * (inflation_radius_ / resolution_);
    for (int dx = -reach; dx <= reach; ++dx) {
      for (int dy = -reach; dy <= reach; ++dy) {
        for (int dz = -reach; dz <= reach; ++dz) {
          if (dx * dx + dy * dy + dz * dz <= r2 + 1e-9) {
            stencil.emplace_back(dx, dy, dz);
          }
        }
      }
    }
    for (int x = 0; x < dims_.x(); ++x) {
      for (int y = 0; y < dims_.y(); ++y) {
        for (int z = 0; z < dims_.z(); ++z) {
          const Vector3i c(x, y, z);
          if (!occupiedCell(c)) {
            continue;
          }
          for (const Vector3i &d : stencil) {
            out.setOccupied(c + d);
          }
        }
      }
    }
    return out;
  }

  // Time-uniform sampled collision check. The default step keeps the spatial
  // stride below one cell: dt * v_max <= resolution.
  CollisionReport checkTrajectory(const Trajectory &traj,
                                  double dt_check) const {
    if (!(dt_check > 0.0)) {
      throw std::invalid_argument("checkTrajectory: dt must be positive");
    }
    CollisionReport report;
    report.dt = dt_check;
    const double T = traj.totalDuration();
    const int steps = static_cast<int>(std::ceil(T / dt_check));
    bool in_run = false;
    double run_start = 0.0, run_end = 0.0;
    for (int s = 0; s <= steps; ++s) {
      const double t = std::min(s * dt_check, T);
      const bool hit = occupiedAt(traj.eval(t, 0));
      if (hit && !in_run) {
        in_run = true;
        run_start = t;
        run_end = t;
      } else if (hit) {
        run_end = t;
      }
      if (in_run && (!hit || s == steps)) {
        CollisionInterval iv;
        iv.t_start = run_start;
        iv.t_end = run_end;
        iv.t_mid = 0.5 * (run_start + run_end);
        iv.p_mid = traj.eval(iv.t_mid, 0);
        report.intervals.push_back(iv);
        in_run = false;
      }
    }
    return report;
  }

  bool trajectoryClear(const Trajectory &traj, double dt_check) const {
    const double T = traj.totalDuration();
    const int steps = static_cast<int>(std::ceil(T / dt_check));
    for (int s = 0; s <= steps; ++s) {
      if (occupiedAt(traj.eval(std::min(s * dt_check, T), 0))) {
        return false;
      }
    }
    return true;
  }

  bool segmentClear(const Vec3 &a, const Vec3 &b) const {
    const double len = (b - a).norm();
    const int steps =
        std::max(1, static_cast<int>(std::ceil(len / (0.5 * resolution_))));
    for (int s = 0; s <= steps; ++s) {
      if (occupiedAt(a + (b - a) * (static_cast<double>(s) / steps))) {
        return false;
      }
    }
    return true;
  }

  std::size_t cellIndex(const Vector3i &c) const {
    return (static_cast<std::size_t>(c.z()) * dims_.y() + c.y()) * dims_.x() +
           c.x();
  }

  Vector3i indexToCell(std::size_t idx) const {
    const int x = static_cast<int>(idx % dims_.x());
    const int y = static_cast<int>((idx / dims_.x()) % dims_.y());
    const int z = static_cast<int>(idx / (static_cast<std::size_t>(dims_.x()) *
                                          dims_.y()));
    return Vector3i(x, y, z);
  }

  const std::vector<std::uint64_t> &rawBits() const { return bits_; }
  std::vector<std::uint64_t> &rawBits() { return bits_; }

 private:
  Vec3 origin_ = Vec3::Zero();
  double resolution_ = 0.1;
  Vector3i dims_ = Vector3i(1, 1, 1);
  double inflation_radius_ = 0.3;
  std::vector<std::uint64_t> bits_;
};

struct LocalAStarResult {
  std::vector<Vec3> path;  // cell centers, start to goal; empty on failure
  int expanded = 0;
  bool success() const { return !path.empty(); }
};

// 26-connected grid search restricted to an axis-aligned cell box.
// Edge costs are Euclidean center distances; the straight-line heuristic is
// admissible. Occupied endpoints are snapped to the nearest free cell within
// 3 cells, else the search fails.
inline LocalAStarResult localAStar(const OccupancyGrid &grid,
                                   const Vec3 &p_start, const Vec3 &p_goal,
                                   const Vector3i &box_lo,
                                   const Vector3i &box_hi) {
  LocalAStarResult result;
  const Vector3i lo = box_lo.cwiseMax(Vector3i::Zero());
  const Vector3i hi = box_hi.cwiseMin(grid.dims() - Vector3i::Ones());
  if ((lo.array() > hi.array()).any()) {
    return result;
  }
  const Vector3i span = hi - lo + Vector3i::Ones();

  auto boxIndex = [&](const Vector3i &c) {
    const Vector3i r = c - lo;
    return (static_cast<std::size_t>(r.z()) * span.y() + r.y()) * span.x() +
           r.x();
  };
  auto inBox = [&](const Vector3i &c) {
    return (c.array() >= lo.array()).all() && (c.array() <= hi.array()).all();
  };

  auto snapFree = [&](Vector3i c) -> std::pair<bool, Vector3i> {
    if (inBox(c) && !grid.occupiedCell(c)) {
      return {true, c};
    }
    for (int radius = 1; radius <= 3; ++radius) {
      Vector3i best;
      double best_d = 1e300;
      bool found = false;
      for (int dx = -radius; dx <= radius; ++dx) {
        for (int dy = -radius; dy <= radius; ++dy) {
          for (int dz = -radius; dz <= radius; ++dz) {
            const Vector3i n = c + Vector3i(dx, dy, dz);
            if (!inBox(n) || grid.occupiedCell(n)) {
              continue;
            }
            const double d = Vector3i(dx, dy, dz).cast<double>().norm();
            if (d < best_d) {
              best_d = d;
              best = n;
              found = true;
            }
          }
        }
      }
      if (found) {
        return {true, best};
      }
    }
    return {false, c};
  };

  auto [ok_s, start] = snapFree(grid.worldToCell(p_start));
  auto [ok_g, goal] = snapFree(grid.worldToCell(p_goal));
  if (!ok_s || !ok_g) {
    return result;
  }
  if (start == goal) {
    result.path = {grid.cellCenter(start)};
    return result;
  }

  const std::size_t n_cells = static_cast<std::size_t>(span.x()) * span.y() *
                              span.z();
  std::vector<double> g_score(n_cells, 1e300);
  std::vector<std::int32_t> parent(n_cells, -1);
  std::vector<std::uint8_t> closed(n_cells, 0);

  struct QEntry {
    double f;
    std::size_t idx;
    bool operator>(const QEntry &o) const { return f > o.f; }
  };
  std::priority_queue<QEntry, std::vector<QEntry>, std::greater<QEntry>> open;

  auto heuristic = [&](const Vector3i &c) {
    return (c - goal).cast<double>().norm() * grid.resolution();
  };
  auto cellOfBoxIndex = [&](std::size_t idx) -> Vector3i {
    const int x = static_cast<int>(idx % span.x());
    const int y = static_cast<int>((idx / span.x()) % span.y());
    const int z = static_cast<int>(idx / (static_cast<std::size_t>(span.x()) *
                                          span.y()));
    return lo + Vector3i(x, y, z);
  };

  const std::size_t start_idx = boxIndex(start);
  g_score[start_idx] = 0.0;
  open.push({heuristic(start), start_idx});

  while (!open.empty()) {
    const QEntry top = open.top();
    open.pop();
    if (closed[top.idx]) {
      continue;
    }
    closed[top.idx] = 1;
    ++result.expanded;
    const Vector3i c = cellOfBoxIndex(top.idx);
    if (c == goal) {
      std::vector<Vec3> rev;
      std::size_t cur = top.idx;
      while (true) {
        rev.push_back(grid.cellCenter(cellOfBoxIndex(cur)));
        if (parent[cur] < 0) {
          break;
        }
        cur = static_cast<std::size_t>(parent[cur]);
      }
      result.path.assign(rev.rbegin(), rev.rend());
      return result;
    }
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dz = -1; dz <= 1; ++dz) {
          if (dx == 0 && dy == 0 && dz == 0) {
            continue;
          }
          const Vector3i nb = c + Vector3i(dx, dy, dz);
          if (!inBox(nb) || grid.occupiedCell(nb)) {
            continue;
          }
          const std::size_t nb_idx = boxIndex(nb);
          if (closed[nb_idx]) {
            continue;
          }
          const double step =
              Vector3i(dx, dy, dz).cast<double>().norm() * grid.resolution();
          const double cand = g_score[top.idx] + step;
          if (cand < g_score[nb_idx]) {
            g_score[nb_idx] = cand;
            parent[nb_idx] = static_cast<std::int32_t>(top.idx);
            open.push({cand + heuristic(nb), nb_idx});
          }
        }
      }
    }
  }
  return result;
}

inline double pathLength(const std::vector<Vec3> &path) {
  double len = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    len += (path[i] - path[i - 1]).norm();
  }
  return len;
}

}  // namespace kinoplan

#endif
