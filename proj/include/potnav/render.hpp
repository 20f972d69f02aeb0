#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "potnav/grid_map.hpp"
#include "potnav/potentials.hpp"
#include "potnav/sim.hpp"

namespace potnav {

using Rgb = std::array<std::uint8_t, 3>;

/// 8-bit RGB raster, row-major, one pixel per map cell before scaling.
class Image {
public:
  Image() = default;
  Image(int width, int height, Rgb fill = {0, 0, 0});

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  Rgb at(int row, int col) const;
  void set(int row, int col, Rgb c);
  std::span<const std::uint8_t> bytes() const noexcept { return data_; }
  bool operator==(const Image&) const = default;

private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Fixed colours; object categories cycle through a ten-entry table by id.
namespace palette {
inline constexpr Rgb kUnexplored{255, 255, 255};
inline constexpr Rgb kFree{232, 232, 232};
inline constexpr Rgb kObstacle{96, 96, 96};
inline constexpr Rgb kFrontier{30, 90, 220};
inline constexpr Rgb kPath{0, 150, 60};
inline constexpr Rgb kStart{255, 200, 0};
inline constexpr Rgb kStop{150, 0, 160};
inline constexpr Rgb kRed{255, 0, 0};
Rgb category(CategoryId id);
}  // namespace palette

/// Category-coloured map; frontier cells are drawn in the frontier colour.
Image render_map(const SemanticGrid& grid);
/// Blends every cell toward red by its value; a value of 0 leaves it as is.
void overlay_potential(Image& image, const PotentialField& field);
/// Polyline through the pose cells (8-connected raster between consecutive
/// poses), first cell in the start colour, last in the stop colour.
void overlay_trajectory(Image& image, std::span<const Pose> trajectory);
/// Cells of the 8-connected line from `a` to `b`, both ends included.
std::vector<GridCell> raster_line(GridCell a, GridCell b);

/// Nearest-neighbour upscale by an integer factor >= 1.
Image upscale(const Image& image, int factor);
/// Binary PPM (P6).
std::string encode_ppm(const Image& image);

}  // namespace potnav
