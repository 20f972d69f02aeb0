#include "potnav/raycast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "potnav/errors.hpp"

namespace potnav {

Direction heading_direction(double heading_deg) {
  const double rad = heading_deg * std::numbers::pi / 180.0;
  return {-std::sin(rad), std::cos(rad)};
}

void trace_ray(const SemanticGrid& world, GridCell origin, Direction dir, double range_cells,
               std::vector<GridCell>& out) {
  if (!world.in_bounds(origin)) throw BoundsError("trace_ray: origin out of bounds");
  constexpr double inf = std::numeric_limits<double>::infinity();
  const auto obstacle = world.obstacle_channel();
  const int w = world.width();
  const int h = world.height();
  int r = origin.row;
  int c = origin.col;
  out.push_back({r, c});
  if (obstacle[world.index(origin)]) return;

  const int step_r = dir.drow > 0 ? 1 : -1;
  const int step_c = dir.dcol > 0 ? 1 : -1;
  // Ray starts at the cell centre, so the first boundary is half a cell away.
  const double delta_r = dir.drow != 0.0 ? 1.0 / std::abs(dir.drow) : inf;
  const double delta_c = dir.dcol != 0.0 ? 1.0 / std::abs(dir.dcol) : inf;
  double t_r = 0.5 * delta_r;
  double t_c = 0.5 * delta_c;
  while (true) {
    if (t_c < t_r) {
      if (t_c > range_cells) return;
      c += step_c;
      t_c += delta_c;
    } else {
      if (t_r > range_cells) return;
      r += step_r;
      t_r += delta_r;
    }
    if (r < 0 || r >= h || c < 0 || c >= w) return;
    out.push_back({r, c});
    if (obstacle[static_cast<std::size_t>(r) * w + c]) return;
  }
}

int rays_for(double fov_deg, double range_cells) {
  const double arc = fov_deg * std::numbers::pi / 180.0 * range_cells;
  return std::max(3, static_cast<int>(std::ceil(2.0 * arc)) + 1);
}

void mark_visible(const SemanticGrid& world, GridCell origin, double heading_deg, double fov_deg,
                  double range_m, int rays, std::vector<std::uint8_t>& mask) {
  if (!(fov_deg > 0.0 && fov_deg <= 360.0)) throw ArgumentError("field of view must be in (0, 360]");
  if (!(range_m > 0.0)) throw ArgumentError("sensing range must be > 0");
  if (rays < 1) throw ArgumentError("ray count must be >= 1");
  if (mask.size() != world.size()) throw ShapeError("mark_visible: mask size differs from grid");
  const double range_cells = range_m / world.resolution();
  std::vector<GridCell> cells;
  for (int i = 0; i < rays; ++i) {
    double angle = heading_deg;
    if (fov_deg >= 360.0) {
      angle += 360.0 * i / rays;
    } else if (rays > 1) {
      angle += -0.5 * fov_deg + fov_deg * i / (rays - 1);
    }
    cells.clear();
    trace_ray(world, origin, heading_direction(angle), range_cells, cells);
    for (const auto& c : cells) mask[world.index(c)] = 1;
  }
}

}  // namespace potnav
