#include "potnav/render.hpp"

#include <cmath>
#include <cstdlib>

#include "potnav/errors.hpp"

namespace potnav {

Image::Image(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) throw ArgumentError("image size must be positive");
  data_.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3);
  for (std::size_t i = 0; i < data_.size(); i += 3) {
    data_[i] = fill[0];
    data_[i + 1] = fill[1];
    data_[i + 2] = fill[2];
  }
}

Rgb Image::at(int row, int col) const {
  if (row < 0 || row >= height_ || col < 0 || col >= width_) throw BoundsError("pixel out of range");
  const std::size_t i = (static_cast<std::size_t>(row) * width_ + col) * 3;
  return {data_[i], data_[i + 1], data_[i + 2]};
}

void Image::set(int row, int col, Rgb c) {
  if (row < 0 || row >= height_ || col < 0 || col >= width_) throw BoundsError("pixel out of range");
  const std::size_t i = (static_cast<std::size_t>(row) * width_ + col) * 3;
  data_[i] = c[0];
  data_[i + 1] = c[1];
  data_[i + 2] = c[2];
}

Rgb palette::category(CategoryId id) {
  // muted tab10-like hues, none of them pure red so PF overlays stay readable
  static constexpr std::array<Rgb, 10> kTable{{
      {31, 119, 180},  {255, 127, 14}, {44, 160, 44},  {148, 103, 189}, {140, 86, 75},
      {227, 119, 194}, {188, 189, 34}, {23, 190, 207}, {127, 127, 127}, {174, 199, 232},
  }};
  return kTable[static_cast<std::size_t>(id) % kTable.size()];
}

Image render_map(const SemanticGrid& grid) {
  Image img(grid.width(), grid.height(), palette::kUnexplored);
  const auto explored = grid.explored_channel();
  const auto obstacle = grid.obstacle_channel();
  const auto object = grid.object_channel();
  const auto frontier = frontier_mask(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!explored[i]) continue;
    const auto c = grid.cell_at(i);
    Rgb col = palette::kFree;
    if (object[i] != kNoCategory) {
      col = palette::category(object[i]);
    } else if (obstacle[i]) {
      col = palette::kObstacle;
    } else if (frontier[i]) {
      col = palette::kFrontier;
    }
    img.set(c.row, c.col, col);
  }
  return img;
}

void overlay_potential(Image& image, const PotentialField& field) {
  if (field.width() != image.width() || field.height() != image.height()) {
    throw ShapeError("potential field and image differ in size");
  }
  const auto v = field.values();
  for (int r = 0; r < image.height(); ++r) {
    for (int c = 0; c < image.width(); ++c) {
      const double a = v[static_cast<std::size_t>(r) * image.width() + c];
      if (!(a > 0.0)) continue;
      const double t = std::min(a, 1.0);
      Rgb px = image.at(r, c);
      for (int k = 0; k < 3; ++k) {
        px[k] = static_cast<std::uint8_t>(std::lround(px[k] + (palette::kRed[k] - px[k]) * t));
      }
      image.set(r, c, px);
    }
  }
}

std::vector<GridCell> raster_line(GridCell a, GridCell b) {
  std::vector<GridCell> out;
  const int dr = std::abs(b.row - a.row);
  const int dc = std::abs(b.col - a.col);
  const int sr = a.row < b.row ? 1 : -1;
  const int sc = a.col < b.col ? 1 : -1;
  int err = dc - dr;
  GridCell p = a;
  while (true) {
    out.push_back(p);
    if (p == b) break;
    const int e2 = 2 * err;
    if (e2 > -dr) {
      err -= dr;
      p.col += sc;
    }
    if (e2 < dc) {
      err += dc;
      p.row += sr;
    }
  }
  return out;
}

void overlay_trajectory(Image& image, std::span<const Pose> trajectory) {
  if (trajectory.empty()) return;
  auto put = [&](GridCell c, Rgb col) {
    if (c.row < 0 || c.row >= image.height() || c.col < 0 || c.col >= image.width()) {
      throw BoundsError("trajectory leaves the image");
    }
    image.set(c.row, c.col, col);
  };
  for (std::size_t i = 1; i < trajectory.size(); ++i) {
    for (const auto& c : raster_line(trajectory[i - 1].cell, trajectory[i].cell)) put(c, palette::kPath);
  }
  put(trajectory.front().cell, palette::kStart);
  put(trajectory.back().cell, palette::kStop);
}

Image upscale(const Image& image, int factor) {
  if (factor < 1) throw ArgumentError("scale must be >= 1");
  if (factor == 1) return image;
  Image out(image.width() * factor, image.height() * factor);
  for (int r = 0; r < out.height(); ++r) {
    for (int c = 0; c < out.width(); ++c) out.set(r, c, image.at(r / factor, c / factor));
  }
  return out;
}

std::string encode_ppm(const Image& image) {
  std::string out = "P6\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
  const auto b = image.bytes();
  out.append(reinterpret_cast<const char*>(b.data()), b.size());
  return out;
}

}  // namespace potnav
