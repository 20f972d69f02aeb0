#pragma once

#include <cstdint>
#include <vector>

#include "potnav/grid_map.hpp"

namespace potnav {

/// Unit direction of a heading in degrees: 0 points along +col, 90 along -row.
struct Direction {
  double drow = 0.0;
  double dcol = 0.0;
};
Direction heading_direction(double heading_deg);

/// Appends the cells a ray from the centre of `origin` passes through, in
/// order, until it leaves the grid, travels further than `range_cells`, or
/// enters an obstacle of `world` (that cell is included). `origin` itself is
/// the first cell appended.
void trace_ray(const SemanticGrid& world, GridCell origin, Direction dir, double range_cells,
               std::vector<GridCell>& out);

/// Number of rays that keeps adjacent ray tips at most half a cell apart.
int rays_for(double fov_deg, double range_cells);

/// Sets `mask` (row-major, world-sized) on every cell seen from `origin`
/// with `rays` rays spread over the field of view. fov 360 covers the full
/// circle without repeating the first ray.
void mark_visible(const SemanticGrid& world, GridCell origin, double heading_deg, double fov_deg,
                  double range_m, int rays, std::vector<std::uint8_t>& mask);

}  // namespace potnav
