#include <catch2/catch_amalgamated.hpp>

#include "kinoplan/bvp.hpp"
#include "kinoplan/env_gen.hpp"
#include "kinoplan/grid_map.hpp"
#include "test_helpers.hpp"

using namespace kinoplan;

namespace {

// Oracle: all-pairs Euclidean dilation.
OccupancyGrid bruteForceInflate(const OccupancyGrid &grid) {
  OccupancyGrid out = grid;
  const double r = grid.inflationRadius();
  for (std::size_t i = 0; i < grid.cellCount(); ++i) {
    const Vector3i ci = grid.indexToCell(i);
    if (grid.occupiedCell(ci)) {
      continue;
    }
    const Vec3 pi = grid.cellCenter(ci);
    for (std::size_t k = 0; k < grid.cellCount(); ++k) {
      const Vector3i ck = grid.indexToCell(k);
      if (!grid.occupiedCell(ck)) {
        continue;
      }
      if ((grid.cellCenter(ck) - pi).norm() <= r + 1e-12) {
        out.setOccupied(ci);
        break;
      }
    }
  }
  return out;
}

// Oracle: Dijkstra over the same restricted 26-connected graph.
double dijkstraCost(const OccupancyGrid &grid, const Vector3i &start,
                    const Vector3i &goal, const Vector3i &lo,
                    const Vector3i &hi) {
  struct Entry {
    double d;
    Vector3i c;
    bool operator>(const Entry &o) const { return d > o.d; }
  };
  auto key = [&](const Vector3i &c) {
    return (static_cast<std::int64_t>(c.z()) << 40) |
           (static_cast<std::int64_t>(c.y()) << 20) | c.x();
  };
  std::unordered_map<std::int64_t, double> dist;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> pq;
  dist[key(start)] = 0.0;
  pq.push({0.0, start});
  while (!pq.empty()) {
    const auto [d, c] = pq.top();
    pq.pop();
    if (d > dist[key(c)] + 1e-12) {
      continue;
    }
    if (c == goal) {
      return d;
    }
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dz = -1; dz <= 1; ++dz) {
          if (dx == 0 && dy == 0 && dz == 0) {
            continue;
          }
          const Vector3i nb = c + Vector3i(dx, dy, dz);
          if ((nb.array() < lo.array()).any() ||
              (nb.array() > hi.array()).any() || grid.occupiedCell(nb)) {
            continue;
          }
          const double nd =
              d + Vector3i(dx, dy, dz).cast<double>().norm() *
                      grid.resolution();
          auto it = dist.find(key(nb));
          if (it == dist.end() || nd < it->second - 1e-15) {
            dist[key(nb)] = nd;
            pq.push({nd, nb});
          }
        }
      }
    }
  }
  return -1.0;
}

}  // namespace

TEST_CASE("inflate: zero radius is the identity", "[grid]") {
  OccupancyGrid g(Vec3::Zero(), 0.1, Vector3i(10, 10, 10), 0.0);
  g.setOccupied(Vector3i(5, 5, 5));
  CHECK(g.inflate() == g);
}

TEST_CASE("inflate: single cell ball at 0.3 m", "[grid]") {
  OccupancyGrid g(Vec3::Zero(), 0.1, Vector3i(20, 20, 20), 0.3);
  const Vector3i center(10, 10, 10);
  g.setOccupied(center);
  const OccupancyGrid inflated = g.inflate();
  const Vec3 c = g.cellCenter(center);
  // Cell center ~0.245 m away -> occupied; ~0.36 m away -> free.
  CHECK(inflated.occupiedCell(center + Vector3i(2, 1, 1)));
  CHECK_FALSE(inflated.occupiedCell(center + Vector3i(3, 2, 0)));
  for (std::size_t i = 0; i < g.cellCount(); ++i) {
    const Vector3i cell = g.indexToCell(i);
    const double d = (g.cellCenter(cell) - c).norm();
    CHECK(inflated.occupiedCell(cell) == (d <= 0.3 + 1e-12));
  }
}

TEST_CASE("inflate: matches brute force on a random 20^3 grid", "[grid]") {
  Rng rng(211);
  OccupancyGrid g(Vec3::Zero(), 0.1, Vector3i(20, 20, 20), 0.3);
  for (int i = 0; i < 25; ++i) {
    g.setOccupied(Vector3i(rng.uniformInt(0, 19), rng.uniformInt(0, 19),
                           rng.uniformInt(0, 19)));
  }
  const OccupancyGrid fast = g.inflate();
  const OccupancyGrid slow = bruteForceInflate(g);
  CHECK(fast == slow);
  // Monotone: inflation never frees a cell.
  for (std::size_t i = 0; i < g.cellCount(); ++i) {
    const Vector3i c = g.indexToCell(i);
    if (g.occupiedCell(c)) {
      CHECK(fast.occupiedCell(c));
    }
  }
}

TEST_CASE("check_trajectory: empty grid reports clear", "[grid]") {
  OccupancyGrid g(Vec3::Zero(), 0.1, Vector3i(100, 100, 30));
  Eigen::Matrix3Xd c = Eigen::Matrix3Xd::Zero(3, 2);
  c.col(0) = Vec3(1.0, 1.0, 1.0);
  c(0, 1) = 2.0;
  Trajectory traj({Piece(c, 3.0)});
  CHECK(g.checkTrajectory(traj, 0.01).clear());
}

TEST_CASE("check_trajectory: wall crossing yields one interval with midpoint "
          "inside the slab",
          "[grid]") {
  OccupancyGrid g(Vec3::Zero(), 0.1, Vector3i(100, 40, 20));
  g.fillBox(Vec3(4.0, 0.0, 0.0), Vec3(5.0, 4.0, 2.0));
  Eigen::Matrix3Xd c = Eigen::Matrix3Xd::Zero(3, 2);
  c.col(0) = Vec3(1.0, 2.0, 1.0);
  c(0, 1) = 2.0;  // crosses x in [4,5] during t in [1.5, 2.0]
  Trajectory traj({Piece(c, 4.0)});
  const CollisionReport report = g.checkTrajectory(traj, 0.01);
  REQUIRE(report.intervals.size() == 1);
  const auto &iv = report.intervals.front();
  CHECK(iv.p_mid.x() > 4.0);
  CHECK(iv.p_mid.x() < 5.0);
  CHECK(iv.t_mid == Catch::Approx(0.5 * (iv.t_start + iv.t_end)));
}

TEST_CASE("check_trajectory: intervals agree with a 10x oversampled check",
          "[grid]") {
  Rng rng(223);
  const OccupancyGrid g =
      generateEnvironment(EnvSpec::forest(Vec3(12.0, 12.0, 3.0), 5, 0.12))
          .inflate();
  for (int trial = 0; trial < 12; ++trial) {
    const FlatState a(Vec3(rng.uniform(1.0, 11.0), rng.uniform(1.0, 11.0),
                           rng.uniform(0.5, 2.5)),
                      Vec3::Zero(), Vec3::Zero());
    const FlatState b(Vec3(rng.uniform(1.0, 11.0), rng.uniform(1.0, 11.0),
                           rng.uniform(0.5, 2.5)),
                      Vec3::Zero(), Vec3::Zero());
    Trajectory traj({quinticFromBoundary(a, b, 3.0)});
    const double dt = 0.1 / 7.0;
    const CollisionReport coarse = g.checkTrajectory(traj, dt);
    const CollisionReport fine = g.checkTrajectory(traj, dt / 10.0);
    if (coarse.clear()) {
      continue;  // safety-margin property is tested separately
    }
    // Every coarse interval endpoint is within dt of a fine interval's.
    for (const auto &iv : coarse.intervals) {
      bool matched = false;
      for (const auto &fv : fine.intervals) {
        if (std::abs(fv.t_start - iv.t_start) <= dt + 1e-12 &&
            std::abs(fv.t_end - iv.t_end) <= dt + 1e-12) {
          matched = true;
          break;
        }
      }
      CHECK(matched);
    }
  }
}

TEST_CASE("local A*: start equals goal", "[grid]") {
  OccupancyGrid g(Vec3::Zero(), 0.1, Vector3i(30, 30, 10));
  const auto r = localAStar(g, Vec3(1.0, 1.0, 0.5), Vec3(1.0, 1.0, 0.5),
                            Vector3i(0, 0, 0), Vector3i(29, 29, 9));
  REQUIRE(r.success());
  CHECK(r.path.size() == 1);
}

TEST_CASE("local A*: free corridor path length near the Euclidean distance",
          "[grid]") {
  OccupancyGrid g(Vec3::Zero(), 0.1, Vector3i(60, 20, 10));
  const Vec3 a(0.55, 1.05, 0.55), b(5.45, 1.05, 0.55);
  const auto r = localAStar(g, a, b, Vector3i(0, 0, 0), Vector3i(59, 19, 9));
  REQUIRE(r.success());
  const double diag = std::sqrt(3.0) * g.resolution();
  CHECK(pathLength(r.path) <= (b - a).norm() + diag + 1e-9);
}

TEST_CASE("local A*: optimal cost equals Dijkstra on random instances",
          "[grid][property]") {
  Rng rng(227);
  int solved = 0;
  for (int trial = 0; trial < 50; ++trial) {
    OccupancyGrid g(Vec3::Zero(), 0.1, Vector3i(40, 40, 40));
    for (int i = 0; i < 260; ++i) {
      g.setOccupied(Vector3i(rng.uniformInt(0, 39), rng.uniformInt(0, 39),
                             rng.uniformInt(0, 39)));
    }
    Vector3i cs(rng.uniformInt(1, 38), rng.uniformInt(1, 38),
                rng.uniformInt(1, 38));
    Vector3i cg(rng.uniformInt(1, 38), rng.uniformInt(1, 38),
                rng.uniformInt(1, 38));
    if (g.occupiedCell(cs) || g.occupiedCell(cg)) {
      continue;
    }
    const Vector3i lo(0, 0, 0), hi(39, 39, 39);
    const auto r = localAStar(g, g.cellCenter(cs), g.cellCenter(cg), lo, hi);
    const double ref = dijkstraCost(g, cs, cg, lo, hi);
    if (ref < 0.0) {
      CHECK_FALSE(r.success());
      continue;
    }
    REQUIRE(r.success());
    CHECK(pathLength(r.path) == Catch::Approx(ref).margin(1e-9));
    ++solved;
  }
  CHECK(solved > 30);
}

TEST_CASE("local A*: occupied endpoints snap within 3 cells", "[grid]") {
  OccupancyGrid g(Vec3::Zero(), 0.1, Vector3i(30, 30, 10));
  g.fillBox(Vec3(1.0, 1.0, 0.0), Vec3(1.2, 1.2, 1.0));
  const auto r = localAStar(g, Vec3(1.05, 1.05, 0.55), Vec3(2.5, 2.5, 0.55),
                            Vector3i(0, 0, 0), Vector3i(29, 29, 9));
  CHECK(r.success());
}

TEST_CASE("generate: double wall has 2 slabs with 20 gaps of 0.7 m", "[env]") {
  const OccupancyGrid g = generateEnvironment(EnvSpec::doubleWall(3));
  // Identify wall slabs: x-columns with high occupancy.
  std::vector<int> wall_x;
  for (int x = 0; x < g.dims().x(); ++x) {
    int occ = 0;
    for (int y = 0; y < g.dims().y(); ++y) {
      occ += g.occupiedCell(Vector3i(x, y, 0)) ? 1 : 0;
    }
    if (occ > g.dims().y() / 2) {
      wall_x.push_back(x);
    }
  }
  REQUIRE(!wall_x.empty());
  // Group adjacent columns into slabs.
  int slabs = 1;
  for (std::size_t i = 1; i < wall_x.size(); ++i) {
    if (wall_x[i] != wall_x[i - 1] + 1) {
      ++slabs;
    }
  }
  CHECK(slabs == 2);

  // Count gap openings per slab on the z=0 layer.
  std::vector<std::pair<int, int>> slab_ranges;
  int begin = wall_x.front();
  for (std::size_t i = 1; i <= wall_x.size(); ++i) {
    if (i == wall_x.size() || wall_x[i] != wall_x[i - 1] + 1) {
      slab_ranges.emplace_back(begin, wall_x[i - 1]);
      if (i < wall_x.size()) {
        begin = wall_x[i];
      }
    }
  }
  for (const auto &[x0, x1] : slab_ranges) {
    const int x = (x0 + x1) / 2;
    int gaps = 0;
    int run = 0;
    for (int y = 0; y <= g.dims().y(); ++y) {
      const bool free_cell =
          y < g.dims().y() && !g.occupiedCell(Vector3i(x, y, 0));
      if (free_cell) {
        ++run;
      } else {
        if (run > 0) {
          ++gaps;
          CHECK(run == 7);  // 0.7 m at 0.1 m resolution
        }
        run = 0;
      }
    }
    CHECK(gaps == 20);
  }
}

TEST_CASE("generate: deterministic in the seed", "[env]") {
  const auto spec = EnvSpec::forest(Vec3(15.0, 15.0, 3.0), 99);
  CHECK(generateEnvironment(spec) == generateEnvironment(spec));
  auto other = spec;
  other.seed = 100;
  CHECK_FALSE(generateEnvironment(other) == generateEnvironment(spec));
}

TEST_CASE("generate: corridor has 3 slabs and free space between them",
          "[env]") {
  const auto spec = EnvSpec::corridor(Vec3(20.0, 20.0, 3.0), 7);
  const OccupancyGrid g = generateEnvironment(spec);
  std::vector<int> wall_x;
  for (int x = 0; x < g.dims().x(); ++x) {
    int occ = 0;
    for (int y = 0; y < g.dims().y(); ++y) {
      occ += g.occupiedCell(Vector3i(x, y, 0)) ? 1 : 0;
    }
    if (occ > g.dims().y() / 2) {
      wall_x.push_back(x);
    }
  }
  int slabs = wall_x.empty() ? 0 : 1;
  for (std::size_t i = 1; i < wall_x.size(); ++i) {
    if (wall_x[i] != wall_x[i - 1] + 1) {
      ++slabs;
    }
  }
  CHECK(slabs == 3);
  // Straight probes midway between consecutive walls are free.
  for (double frac : {0.375, 0.625}) {
    const double x = frac * spec.extents.x();
    bool clear = true;
    for (double y = 0.5; y < spec.extents.y() - 0.5; y += 0.1) {
      clear = clear && !g.occupiedAt(Vec3(x, y, 1.5));
    }
    CHECK(clear);
  }
}

TEST_CASE("generate: invalid parameters raise config errors", "[env]") {
  EnvSpec bad = EnvSpec::corridor(Vec3(5.0, 2.0, 3.0), 1, 10, 0.7);
  // 10 gaps of 7 cells + separation cannot fit into 20 columns.
  CHECK_THROWS_AS(generateEnvironment(bad), std::invalid_argument);
  EnvSpec neg = EnvSpec::empty(Vec3(-1.0, 2.0, 2.0));
  CHECK_THROWS_AS(generateEnvironment(neg), std::invalid_argument);
}

TEST_CASE("collision safety margin: clear at dt stays clear at dt/10 on "
          "benchmark scenes",
          "[grid][property]") {
  Rng rng(229);
  const Limits lim;
  const OccupancyGrid g =
      generateEnvironment(EnvSpec::forest(Vec3(15.0, 15.0, 3.0), 17, 0.1))
          .inflate();
  const double dt = g.resolution() / lim.v_max;
  BvpSolver solver(100.0);
  int clear_count = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const FlatState a(Vec3(rng.uniform(1.0, 14.0), rng.uniform(1.0, 14.0),
                           rng.uniform(0.5, 2.5)),
                      Vec3::Zero(), Vec3::Zero());
    const FlatState b(Vec3(rng.uniform(1.0, 14.0), rng.uniform(1.0, 14.0),
                           rng.uniform(0.5, 2.5)),
                      Vec3::Zero(), Vec3::Zero());
    const SteerResult r = solver.steerWithLimits(a, b, lim);
    if (!r.feasible_derivatives) {
      continue;
    }
    if (g.trajectoryClear(r.trajectory, dt)) {
      ++clear_count;
      CHECK(g.trajectoryClear(r.trajectory, dt / 10.0));
    }
  }
  CHECK(clear_count > 10);
}
