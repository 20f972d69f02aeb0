#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace potnav {

struct GridCell {
  int row = 0;
  int col = 0;

  auto operator<=>(const GridCell&) const = default;
};

using CategoryId = int;
inline constexpr CategoryId kNoCategory = -1;

/// 8-neighbourhood offsets (drow, dcol), row-major order.
inline constexpr std::array<std::array<int, 2>, 8> kNeighbors8 = {{
    {-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1},
}};

/// Ordered object category labels with a per-category "valid navigation goal" flag.
class CategoryTable {
public:
  CategoryTable() = default;
  /// Throws ArgumentError on duplicate/empty names, size mismatch, or no goal category.
  CategoryTable(std::vector<std::string> names, std::vector<bool> goal_flags);

  std::size_t size() const noexcept { return names_.size(); }
  bool contains(CategoryId id) const noexcept {
    return id >= 0 && static_cast<std::size_t>(id) < names_.size();
  }
  const std::string& name(CategoryId id) const;
  bool is_goal(CategoryId id) const;
  std::optional<CategoryId> find(std::string_view name) const;
  std::vector<CategoryId> goal_categories() const;

  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<bool>& goal_flags() const noexcept { return goal_; }

  bool operator==(const CategoryTable&) const = default;

private:
  std::vector<std::string> names_;
  std::vector<bool> goal_;
};

/// Multi-channel top-down map: obstacle, explored, and one optional object
/// category per cell.
///
/// Unexplored cells are stored normalised (no obstacle, no category), so two
/// grids that describe the same knowledge compare equal. `complete()` holds iff
/// every cell is explored.
class SemanticGrid {
public:
  SemanticGrid() = default;
  /// All-unexplored grid. Throws ArgumentError on non-positive size/resolution.
  SemanticGrid(int width, int height, double resolution, CategoryTable categories);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double resolution() const noexcept { return resolution_; }
  const CategoryTable& categories() const noexcept { return categories_; }
  std::size_t size() const noexcept { return explored_.size(); }
  bool complete() const noexcept { return explored_count_ == explored_.size(); }
  std::size_t explored_count() const noexcept { return explored_count_; }

  bool in_bounds(GridCell c) const noexcept {
    return c.row >= 0 && c.row < height_ && c.col >= 0 && c.col < width_;
  }
  std::size_t index(GridCell c) const noexcept {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(c.col);
  }
  GridCell cell_at(std::size_t idx) const noexcept {
    return {static_cast<int>(idx / static_cast<std::size_t>(width_)),
            static_cast<int>(idx % static_cast<std::size_t>(width_))};
  }

  bool explored(GridCell c) const { return explored_[checked(c)] != 0; }
  bool obstacle(GridCell c) const { return obstacle_[checked(c)] != 0; }
  CategoryId object(GridCell c) const { return object_[checked(c)]; }
  /// Explored and not an obstacle.
  bool known_free(GridCell c) const {
    const auto i = checked(c);
    return explored_[i] != 0 && obstacle_[i] == 0;
  }

  /// Marks the cell explored with the given contents.
  void set_cell(GridCell c, bool obstacle, CategoryId object = kNoCategory);
  /// Copies one cell (explored state included) from `src`; shapes must match.
  void copy_cell_from(const SemanticGrid& src, std::size_t idx);

  std::span<const std::uint8_t> explored_channel() const noexcept { return explored_; }
  std::span<const std::uint8_t> obstacle_channel() const noexcept { return obstacle_; }
  std::span<const std::int16_t> object_channel() const noexcept { return object_; }

  bool same_shape(const SemanticGrid& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ &&
           resolution_ == other.resolution_;
  }

  bool operator==(const SemanticGrid& other) const = default;

private:
  std::size_t checked(GridCell c) const;

  int width_ = 0;
  int height_ = 0;
  double resolution_ = 0.05;
  CategoryTable categories_;
  std::vector<std::uint8_t> explored_;
  std::vector<std::uint8_t> obstacle_;
  std::vector<std::int16_t> object_;
  std::size_t explored_count_ = 0;
};

/// Maximal 8-connected set of free-but-unexplored cells.
struct Component {
  int id = 0;
  std::vector<GridCell> cells;
  std::size_t area_cells = 0;
};

/// 8-connected cluster of explored free cells bordering unexplored space.
struct Frontier {
  int id = 0;
  std::vector<GridCell> cells;
};

/// Throws ShapeError unless `a` and `b` agree on width, height and resolution.
void require_same_shape(const SemanticGrid& a, const SemanticGrid& b, std::string_view what);

/// Per-cell flag: explored free with at least one in-bounds unexplored 8-neighbour.
std::vector<std::uint8_t> frontier_mask(const SemanticGrid& grid);

/// Cells free in `complete` and unexplored in `grid`, grouped by 8-connectivity.
/// Ids follow the row-major order of each component's first cell.
std::vector<Component> unexplored_components(const SemanticGrid& grid,
                                             const SemanticGrid& complete);

std::vector<Frontier> extract_frontiers(const SemanticGrid& grid);

/// frontier id -> ids of components with a cell 8-adjacent to one of its cells.
/// Every frontier appears as a key, possibly with an empty list.
std::map<int, std::vector<int>> associate_components(std::span<const Frontier> frontiers,
                                                     std::span<const Component> components);

/// Copy of `grid` with `cells` explored and their contents taken from `complete`.
SemanticGrid reveal(const SemanticGrid& grid, const SemanticGrid& complete,
                    std::span<const GridCell> cells);
/// In-place form of reveal(); returns the number of newly explored cells.
std::size_t reveal_into(SemanticGrid& grid, const SemanticGrid& complete,
                        std::span<const GridCell> cells);

std::size_t count_free_cells(const SemanticGrid& grid);

}  // namespace potnav
