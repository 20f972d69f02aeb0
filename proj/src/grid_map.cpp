#include "potnav/grid_map.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include "potnav/errors.hpp"

namespace potnav {

CategoryTable::CategoryTable(std::vector<std::string> names, std::vector<bool> goal_flags)
    : names_(std::move(names)), goal_(std::move(goal_flags)) {
  if (names_.size() != goal_.size()) {
    throw ArgumentError("category table: names and goal flags differ in length");
  }
  if (names_.size() > 32767) {
    throw ArgumentError("category table: too many categories");
  }
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw ArgumentError("category table: empty category name");
    if (n.find_first_of(" \t\r\n") != std::string::npos) {
      throw ArgumentError("category table: whitespace in category name '" + n + "'");
    }
    if (!seen.insert(n).second) throw ArgumentError("category table: duplicate name '" + n + "'");
  }
  if (std::find(goal_.begin(), goal_.end(), true) == goal_.end()) {
    throw ArgumentError("category table: no goal category");
  }
}

const std::string& CategoryTable::name(CategoryId id) const {
  if (!contains(id)) throw ArgumentError("unknown category id " + std::to_string(id));
  return names_[static_cast<std::size_t>(id)];
}

bool CategoryTable::is_goal(CategoryId id) const {
  if (!contains(id)) throw ArgumentError("unknown category id " + std::to_string(id));
  return goal_[static_cast<std::size_t>(id)];
}

std::optional<CategoryId> CategoryTable::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<CategoryId>(i);
  }
  return std::nullopt;
}

std::vector<CategoryId> CategoryTable::goal_categories() const {
  std::vector<CategoryId> out;
  for (std::size_t i = 0; i < goal_.size(); ++i) {
    if (goal_[i]) out.push_back(static_cast<CategoryId>(i));
  }
  return out;
}

SemanticGrid::SemanticGrid(int width, int height, double resolution, CategoryTable categories)
    : width_(width), height_(height), resolution_(resolution), categories_(std::move(categories)) {
  if (width <= 0 || height <= 0) throw ArgumentError("grid dimensions must be positive");
  if (!(resolution > 0.0)) throw ArgumentError("grid resolution must be > 0");
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  explored_.assign(n, 0);
  obstacle_.assign(n, 0);
  object_.assign(n, static_cast<std::int16_t>(kNoCategory));
}

std::size_t SemanticGrid::checked(GridCell c) const {
  if (!in_bounds(c)) {
    throw BoundsError("cell (" + std::to_string(c.row) + "," + std::to_string(c.col) +
                      ") outside " + std::to_string(height_) + "x" + std::to_string(width_) +
                      " grid");
  }
  return index(c);
}

void SemanticGrid::set_cell(GridCell c, bool obstacle, CategoryId object) {
  const auto i = checked(c);
  if (object != kNoCategory && !categories_.contains(object)) {
    throw ArgumentError("unknown category id " + std::to_string(object));
  }
  if (!explored_[i]) {
    explored_[i] = 1;
    ++explored_count_;
  }
  obstacle_[i] = obstacle ? 1 : 0;
  object_[i] = static_cast<std::int16_t>(object);
}

void SemanticGrid::copy_cell_from(const SemanticGrid& src, std::size_t i) {
  if (src.explored_[i]) {
    if (!explored_[i]) ++explored_count_;
  } else if (explored_[i]) {
    --explored_count_;
  }
  explored_[i] = src.explored_[i];
  obstacle_[i] = src.obstacle_[i];
  object_[i] = src.object_[i];
}

void require_same_shape(const SemanticGrid& a, const SemanticGrid& b, std::string_view what) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(what) + ": grids differ in shape (" + std::to_string(a.height()) +
                     "x" + std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                     std::to_string(b.width()) + ")");
  }
}

std::vector<std::uint8_t> frontier_mask(const SemanticGrid& grid) {
  const int w = grid.width();
  const int h = grid.height();
  const auto explored = grid.explored_channel();
  const auto obstacle = grid.obstacle_channel();
  std::vector<std::uint8_t> mask(grid.size(), 0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * w + c;
      if (!explored[i] || obstacle[i]) continue;
      for (const auto& [dr, dc] : kNeighbors8) {
        const int nr = r + dr;
        const int nc = c + dc;
        if (nr < 0 || nr >= h || nc < 0 || nc >= w) continue;
        if (!explored[static_cast<std::size_t>(nr) * w + nc]) {
          mask[i] = 1;
          break;
        }
      }
    }
  }
  return mask;
}

namespace {

// Labels 8-connected regions of `member` cells; returns cells per label in
// discovery order (row-major seed, BFS within a region).
std::vector<std::vector<GridCell>> label_regions(const SemanticGrid& grid,
                                                 const std::vector<std::uint8_t>& member) {
  const int w = grid.width();
  const int h = grid.height();
  std::vector<std::uint8_t> seen(member.size(), 0);
  std::vector<std::vector<GridCell>> regions;
  std::vector<std::size_t> queue;
  for (std::size_t seed = 0; seed < member.size(); ++seed) {
    if (!member[seed] || seen[seed]) continue;
    std::vector<GridCell> cells;
    queue.clear();
    queue.push_back(seed);
    seen[seed] = 1;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const std::size_t i = queue[head];
      const int r = static_cast<int>(i / w);
      const int c = static_cast<int>(i % w);
      cells.push_back({r, c});
      for (const auto& [dr, dc] : kNeighbors8) {
        const int nr = r + dr;
        const int nc = c + dc;
        if (nr < 0 || nr >= h || nc < 0 || nc >= w) continue;
        const std::size_t j = static_cast<std::size_t>(nr) * w + nc;
        if (member[j] && !seen[j]) {
          seen[j] = 1;
          queue.push_back(j);
        }
      }
    }
    std::sort(cells.begin(), cells.end());
    regions.push_back(std::move(cells));
  }
  return regions;
}

}  // namespace

std::vector<Component> unexplored_components(const SemanticGrid& grid,
                                             const SemanticGrid& complete) {
  require_same_shape(grid, complete, "unexplored_components");
  const auto explored = grid.explored_channel();
  const auto truth_explored = complete.explored_channel();
  const auto truth_obstacle = complete.obstacle_channel();
  std::vector<std::uint8_t> member(grid.size(), 0);
  for (std::size_t i = 0; i < member.size(); ++i) {
    member[i] = (!explored[i] && truth_explored[i] && !truth_obstacle[i]) ? 1 : 0;
  }
  std::vector<Component> out;
  for (auto& cells : label_regions(grid, member)) {
    Component comp;
    comp.id = static_cast<int>(out.size());
    comp.area_cells = cells.size();
    comp.cells = std::move(cells);
    out.push_back(std::move(comp));
  }
  return out;
}

std::vector<Frontier> extract_frontiers(const SemanticGrid& grid) {
  std::vector<Frontier> out;
  for (auto& cells : label_regions(grid, frontier_mask(grid))) {
    out.push_back({static_cast<int>(out.size()), std::move(cells)});
  }
  return out;
}

std::map<int, std::vector<int>> associate_components(std::span<const Frontier> frontiers,
                                                     std::span<const Component> components) {
  auto key = [](GridCell c) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.row)) << 32) |
           static_cast<std::uint32_t>(c.col);
  };
  std::unordered_map<std::uint64_t, int> owner;
  for (const auto& comp : components) {
    for (const auto& c : comp.cells) owner.emplace(key(c), comp.id);
  }
  std::map<int, std::vector<int>> out;
  for (const auto& f : frontiers) {
    std::set<int> ids;
    for (const auto& c : f.cells) {
      for (const auto& [dr, dc] : kNeighbors8) {
        const auto it = owner.find(key({c.row + dr, c.col + dc}));
        if (it != owner.end()) ids.insert(it->second);
      }
    }
    out[f.id] = std::vector<int>(ids.begin(), ids.end());
  }
  return out;
}

std::size_t reveal_into(SemanticGrid& grid, const SemanticGrid& complete,
                        std::span<const GridCell> cells) {
  require_same_shape(grid, complete, "reveal");
  std::size_t added = 0;
  for (const auto& c : cells) {
    if (!grid.in_bounds(c)) {
      throw BoundsError("reveal: cell (" + std::to_string(c.row) + "," + std::to_string(c.col) +
                        ") out of bounds");
    }
  }
  const auto known = complete.explored_channel();
  for (const auto& c : cells) {
    const auto i = grid.index(c);
    if (!grid.explored_channel()[i]) ++added;
    if (known[i]) {
      grid.copy_cell_from(complete, i);
    } else {
      grid.set_cell(c, complete.obstacle(c), complete.object(c));
    }
  }
  return added;
}

SemanticGrid reveal(const SemanticGrid& grid, const SemanticGrid& complete,
                    std::span<const GridCell> cells) {
  SemanticGrid out = grid;
  reveal_into(out, complete, cells);
  return out;
}

std::size_t count_free_cells(const SemanticGrid& grid) {
  const auto explored = grid.explored_channel();
  const auto obstacle = grid.obstacle_channel();
  std::size_t n = 0;
  for (std::size_t i = 0; i < explored.size(); ++i) {
    if (explored[i] && !obstacle[i]) ++n;
  }
  return n;
}

}  // namespace potnav
