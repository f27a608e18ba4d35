#ifndef KINOPLAN_ENV_GEN_HPP
#define KINOPLAN_ENV_GEN_HPP

#include <string>

#include "kinoplan/grid_map.hpp"
#include "kinoplan/rng.hpp"

namespace kinoplan {

// Procedural benchmark environments. All generators are deterministic in the
// seed. 2.5D kinds (forest, corridor, double_wall) extrude obstacles over the
// full height.
struct EnvSpec {
  enum class Kind { kEmpty, kForest, kCave, kCorridor, kDoubleWall };

  Kind kind = Kind::kEmpty;
  Vec3 extents = Vec3(30.0, 30.0, 3.0);
  std::uint64_t seed = 0;
  double resolution = 0.1;
  double inflation = 0.3;

  // forest: vertical cylinders and boxes, count = density * floor area
  double forest_density = 0.10;  // obstacles per m^2
  double forest_radius_min = 0.2;
  double forest_radius_max = 0.6;

  // cave: random occupied blobs with carved connecting tunnels
  int cave_blob_count = 70;
  double cave_blob_radius_min = 0.8;
  double cave_blob_radius_max = 2.4;
  int cave_tunnel_count = 3;
  double cave_tunnel_radius = 0.9;

  // corridor / double_wall: full-height wall slabs pierced by vertical slots
  int wall_count = 3;
  int gaps_per_wall = 3;
  double gap_width = 1.0;
  double wall_thickness = 1.0;

  static EnvSpec empty(const Vec3 &extents, std::uint64_t seed = 0) {
    EnvSpec s;
    s.kind = Kind::kEmpty;
    s.extents = extents;
    s.seed = seed;
    return s;
  }

  static EnvSpec forest(const Vec3 &extents, std::uint64_t seed,
                        double density = 0.10) {
    EnvSpec s;
    s.kind = Kind::kForest;
    s.extents = extents;
    s.seed = seed;
    s.forest_density = density;
    return s;
  }

  static EnvSpec cave(const Vec3 &extents, std::uint64_t seed) {
    EnvSpec s;
    s.kind = Kind::kCave;
    s.extents = extents;
    s.seed = seed;
    return s;
  }

  static EnvSpec corridor(const Vec3 &extents, std::uint64_t seed,
                          int gaps_per_wall = 3, double gap_width = 1.0) {
    EnvSpec s;
    s.kind = Kind::kCorridor;
    s.extents = extents;
    s.seed = seed;
    s.wall_count = 3;
    s.gaps_per_wall = gaps_per_wall;
    s.gap_width = gap_width;
    s.wall_thickness = 1.0;
    return s;
  }

  static EnvSpec doubleWall(std::uint64_t seed) {
    EnvSpec s;
    s.kind = Kind::kDoubleWall;
    s.extents = Vec3(30.0, 30.0, 3.0);
    s.seed = seed;
    s.wall_count = 2;
    s.gaps_per_wall = 20;
    s.gap_width = 0.7;
    s.wall_thickness = 0.3;
    return s;
  }
};

namespace env_detail {

// Non-overlapping slot starts (in cells) along a wall of `columns` cells:
// k slots of w cells with at least `sep` cells between them.
inline std::vector<int> slotStarts(Rng &rng, int columns, int k, int w,
                                   int sep) {
  const int slack = columns - k * w - (k - 1) * sep;
  if (slack < 0) {
    throw std::invalid_argument("EnvSpec: gaps do not fit in the wall");
  }
  std::vector<int> offsets(k);
  for (int i = 0; i < k; ++i) {
    offsets[i] = rng.uniformInt(0, slack);
  }
  std::sort(offsets.begin(), offsets.end());
  std::vector<int> starts(k);
  for (int i = 0; i < k; ++i) {
    starts[i] = offsets[i] + i * (w + sep);
  }
  return starts;
}

inline void addWallWithSlots(OccupancyGrid &grid, Rng &rng, double x_center,
                             double thickness, int gaps, double gap_width) {
  const double res = grid.resolution();
  const Vec3 hi = grid.maxCorner();
  const int columns = grid.dims().y();
  const int w = std::max(1, static_cast<int>(std::round(gap_width / res)));
  const int sep = std::max(2, w / 2);
  const auto starts = slotStarts(rng, columns, gaps, w, sep);

  grid.fillBox(Vec3(x_center - 0.5 * thickness, grid.origin().y(),
                    grid.origin().z()),
               Vec3(x_center + 0.5 * thickness, hi.y(), hi.z()));
  for (int s : starts) {
    const double y0 = grid.origin().y() + s * res;
    const double y1 = y0 + w * res;
    grid.fillBox(Vec3(x_center - 0.5 * thickness - res, y0 + 0.01 * res,
                      grid.origin().z()),
                 Vec3(x_center + 0.5 * thickness + res, y1 - 0.01 * res,
                      hi.z()),
                 false);
  }
}

}  // namespace env_detail

inline OccupancyGrid generateEnvironment(const EnvSpec &spec) {
  if ((spec.extents.array() <= 0.0).any() || spec.resolution <= 0.0) {
    throw std::invalid_argument("EnvSpec: extents and resolution must be positive");
  }
  const Vector3i dims(
      static_cast<int>(std::round(spec.extents.x() / spec.resolution)),
      static_cast<int>(std::round(spec.extents.y() / spec.resolution)),
      static_cast<int>(std::round(spec.extents.z() / spec.resolution)));
  OccupancyGrid grid(Vec3::Zero(), spec.resolution, dims, spec.inflation);
  Rng rng(spec.seed);
  const Vec3 hi = grid.maxCorner();

  switch (spec.kind) {
    case EnvSpec::Kind::kEmpty:
      break;

    case EnvSpec::Kind::kForest: {
      const int count = static_cast<int>(
          spec.forest_density * spec.extents.x() * spec.extents.y());
      const double margin = 1.5;
      for (int i = 0; i < count; ++i) {
        const double cx = rng.uniform(margin, spec.extents.x() - margin);
        const double cy = rng.uniform(margin, spec.extents.y() - margin);
        const double r =
            rng.uniform(spec.forest_radius_min, spec.forest_radius_max);
        const bool box = rng.uniform01() < 0.3;
        if (box) {
          grid.fillBox(Vec3(cx - r, cy - r, 0.0), Vec3(cx + r, cy + r, hi.z()));
        } else {
          // cylinder, full height
          const Vector3i a = grid.worldToCell(Vec3(cx - r, cy - r, 0.0));
          const Vector3i b = grid.worldToCell(Vec3(cx + r, cy + r, 0.0));
          for (int x = std::max(0, a.x()); x <= std::min(dims.x() - 1, b.x());
               ++x) {
            for (int y = std::max(0, a.y());
                 y <= std::min(dims.y() - 1, b.y()); ++y) {
              const Vec3 ctr = grid.cellCenter(Vector3i(x, y, 0));
              if ((ctr.head<2>() - Eigen::Vector2d(cx, cy)).squaredNorm() <=
                  r * r) {
                for (int z = 0; z < dims.z(); ++z) {
                  grid.setOccupied(Vector3i(x, y, z));
                }
              }
            }
          }
        }
      }
      break;
    }

    case EnvSpec::Kind::kCave: {
      for (int i = 0; i < spec.cave_blob_count; ++i) {
        const Vec3 c = rng.inBox(Vec3::Zero(), spec.extents);
        const Vec3 r(rng.uniform(spec.cave_blob_radius_min,
                                 spec.cave_blob_radius_max),
                     rng.uniform(spec.cave_blob_radius_min,
                                 spec.cave_blob_radius_max),
                     rng.uniform(0.4 * spec.cave_blob_radius_min,
                                 0.8 * spec.cave_blob_radius_max));
        const Vector3i a = grid.worldToCell(c - r);
        const Vector3i b = grid.worldToCell(c + r);
        for (int x = std::max(0, a.x()); x <= std::min(dims.x() - 1, b.x());
             ++x) {
          for (int y = std::max(0, a.y()); y <= std::min(dims.y() - 1, b.y());
               ++y) {
            for (int z = std::max(0, a.z());
                 z <= std::min(dims.z() - 1, b.z()); ++z) {
              const Vec3 ctr = grid.cellCenter(Vector3i(x, y, z));
              const Vec3 rel = (ctr - c).cwiseQuotient(r);
              if (rel.squaredNorm() <= 1.0) {
                grid.setOccupied(Vector3i(x, y, z));
              }
            }
          }
        }
      }
      // Carve connected tunnels from the x- face to the x+ face.
      for (int t = 0; t < spec.cave_tunnel_count; ++t) {
        Vec3 cur(0.0, rng.uniform(2.0, spec.extents.y() - 2.0),
                 rng.uniform(0.8, spec.extents.z() - 0.8));
        const int hops = 6;
        for (int h = 1; h <= hops; ++h) {
          Vec3 next(spec.extents.x() * h / hops,
                    rng.uniform(1.0, spec.extents.y() - 1.0),
                    rng.uniform(0.8, spec.extents.z() - 0.8));
          const double len = (next - cur).norm();
          const int steps = std::max(
              2, static_cast<int>(std::ceil(len / (0.5 * spec.resolution))));
          for (int s = 0; s <= steps; ++s) {
            const Vec3 p = cur + (next - cur) * (static_cast<double>(s) / steps);
            const double rt = spec.cave_tunnel_radius;
            const Vector3i a = grid.worldToCell(p - Vec3::Constant(rt));
            const Vector3i b = grid.worldToCell(p + Vec3::Constant(rt));
            for (int x = std::max(0, a.x());
                 x <= std::min(dims.x() - 1, b.x()); ++x) {
              for (int y = std::max(0, a.y());
                   y <= std::min(dims.y() - 1, b.y()); ++y) {
                for (int z = std::max(0, a.z());
                     z <= std::min(dims.z() - 1, b.z()); ++z) {
                  const Vector3i cell(x, y, z);
                  if ((grid.cellCenter(cell) - p).squaredNorm() <= rt * rt) {
                    grid.setOccupied(cell, false);
                  }
                }
              }
            }
          }
          cur = next;
        }
      }
      break;
    }

    case EnvSpec::Kind::kCorridor:
    case EnvSpec::Kind::kDoubleWall: {
      const int n = spec.wall_count;
      for (int w = 0; w < n; ++w) {
        const double x_frac = static_cast<double>(w + 1) / (n + 1);
        env_detail::addWallWithSlots(grid, rng, x_frac * spec.extents.x(),
                                     spec.wall_thickness, spec.gaps_per_wall,
                                     spec.gap_width);
      }
      break;
    }
  }
  return grid;
}

}  // namespace kinoplan

#endif
