#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "potnav/grid_map.hpp"

namespace potnav {

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

enum class DistanceMode {
  kDijkstraOctile,  ///< exact 8-connected shortest paths, costs res and res*sqrt(2)
  kFmmUpwind,       ///< first-order upwind eikonal solution, unit speed
};

/// Metric length of a path with the given numbers of axial and diagonal
/// steps. Every dijkstra-octile distance is produced by this expression.
inline double octile_meters(std::int64_t axial, std::int64_t diagonal, double resolution) {
  return resolution * (static_cast<double>(axial) + static_cast<double>(diagonal) * 1.4142135623730951);
}

/// Per-cell traversability, 1 = traversable. Row-major over the grid.
using TraversableMask = std::vector<std::uint8_t>;

/// Geodesic distance in meters to the nearest source; kUnreachable elsewhere.
class DistanceField {
public:
  DistanceField() = default;
  DistanceField(int width, int height, double resolution, std::vector<double> dist,
                TraversableMask traversable);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double resolution() const noexcept { return resolution_; }
  bool in_bounds(GridCell c) const noexcept {
    return c.row >= 0 && c.row < height_ && c.col >= 0 && c.col < width_;
  }
  std::size_t index(GridCell c) const noexcept {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(c.col);
  }
  double at(GridCell c) const;
  bool reachable(GridCell c) const { return at(c) != kUnreachable; }
  std::span<const double> values() const noexcept { return dist_; }
  std::span<const std::uint8_t> traversable() const noexcept { return traversable_; }

private:
  int width_ = 0;
  int height_ = 0;
  double resolution_ = 0.0;
  std::vector<double> dist_;
  TraversableMask traversable_;
};

struct PathPlan {
  std::vector<GridCell> cells;  ///< start first, zero-distance cell last
  double length_m = 0.0;
};

/// Explored non-obstacle cells.
TraversableMask known_free_mask(const SemanticGrid& grid);

/// Planning mask on a partial map: unexplored cells are traversable, explored
/// obstacles block and are grown by `dilation_cells` (square neighbourhood).
TraversableMask planning_mask(const SemanticGrid& partial, int dilation_cells);

/// Multi-source geodesic distance. Diagonal steps between two blocked axial
/// cells are not allowed.
///
/// Throws ArgumentError when `sources` is empty, a source is out of bounds or a
/// source is not traversable.
DistanceField distance_field(const SemanticGrid& grid, std::span<const GridCell> sources,
                             std::span<const std::uint8_t> traversable,
                             DistanceMode mode = DistanceMode::kDijkstraOctile);
DistanceField distance_field(const SemanticGrid& grid, std::span<const GridCell> sources,
                             const std::function<bool(GridCell)>& traversable,
                             DistanceMode mode = DistanceMode::kDijkstraOctile);

/// Dijkstra-octile field that stops once `target` is settled. Values at
/// settled cells are exact; others are upper bounds no smaller than the
/// target's distance, so shortest_path(field, target) is identical to the one
/// taken on the full field.
DistanceField distance_field_until(const SemanticGrid& grid, std::span<const GridCell> sources,
                                   std::span<const std::uint8_t> traversable, GridCell target);

/// Descends from `start` to a zero-distance cell. Each step moves to the
/// 8-neighbour whose distance plus step cost reproduces the current value
/// (smallest (row, col) on ties), or, for fields without such a neighbour, to
/// the strictly smallest neighbour. Throws NoPathError if `start` is
/// unreachable or descent stalls.
PathPlan shortest_path(const DistanceField& field, GridCell start);

/// Field whose sources are the free cells lying within geodesic `d_s` of any
/// cell holding `category` on the complete map. All cells are unreachable
/// when the category is absent.
DistanceField success_zone_distance(const SemanticGrid& complete, CategoryId category,
                                    double d_s);

/// Guided (A*) form for local planning around `target`. Exact at every cell x
/// with d(x) + octile(x, target) <= d(target) + 2 * radius_m, which covers the
/// shortest path to the target and every cell within octile distance radius_m
/// of the target whose distance is at most d(target) + radius_m. Other reached cells hold
/// upper bounds.
DistanceField distance_field_near(const SemanticGrid& grid, std::span<const GridCell> sources,
                                  std::span<const std::uint8_t> traversable, GridCell target,
                                  double radius_m);

struct NearestTarget {
  GridCell cell;
  double distance_m = 0.0;
};

/// Closest cell flagged in `targets` by dijkstra-octile distance from
/// `source`, ties broken by smallest (row, col). nullopt if none reachable.
std::optional<NearestTarget> nearest_target(const SemanticGrid& grid, GridCell source,
                                            std::span<const std::uint8_t> traversable,
                                            std::span<const std::uint8_t> targets);

}  // namespace potnav
