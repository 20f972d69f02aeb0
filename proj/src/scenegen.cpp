#include "potnav/scenegen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include "potnav/errors.hpp"
#include "potnav/rng.hpp"

namespace potnav {

namespace {

constexpr std::array<std::string_view, kRoomTypeCount> kRoomNames = {
    "bedroom", "bathroom", "kitchen", "living_room", "dining_room", "office"};

constexpr int kWallCells = 2;
constexpr int kMaxAttempts = 64;

struct Rect {
  int r0, c0, r1, c1;  // half-open
  int height() const { return r1 - r0; }
  int width() const { return c1 - c0; }
  long long area() const { return static_cast<long long>(height()) * width(); }
};

struct Wall {
  bool horizontal;  // wall rows [at, at + kWallCells), cols [lo, hi)
  int at, lo, hi;
};

int to_cells(double meters, double res) { return static_cast<int>(std::lround(meters / res)); }

struct Layout {
  std::vector<Rect> rooms;
  std::vector<Wall> walls;
};

Layout partition(const Rect& interior, int target, int min_side, Rng& rng) {
  Layout out;
  out.rooms.push_back(interior);
  const int need = 2 * min_side + kWallCells;
  while (static_cast<int>(out.rooms.size()) < target) {
    int pick = -1;
    for (int i = 0; i < static_cast<int>(out.rooms.size()); ++i) {
      const auto& r = out.rooms[static_cast<std::size_t>(i)];
      if (r.height() < need && r.width() < need) continue;
      if (pick < 0 || r.area() > out.rooms[static_cast<std::size_t>(pick)].area()) pick = i;
    }
    if (pick < 0) break;
    const Rect r = out.rooms[static_cast<std::size_t>(pick)];
    bool horizontal;
    if (r.height() >= need && r.width() >= need) {
      horizontal = r.height() == r.width() ? rng.bernoulli(0.5) : r.height() > r.width();
    } else {
      horizontal = r.height() >= need;
    }
    Rect a = r, b = r;
    if (horizontal) {
      const int s = rng.uniform_int(r.r0 + min_side, r.r1 - min_side - kWallCells);
      a.r1 = s;
      b.r0 = s + kWallCells;
      out.walls.push_back({true, s, r.c0, r.c1});
    } else {
      const int s = rng.uniform_int(r.c0 + min_side, r.c1 - min_side - kWallCells);
      a.c1 = s;
      b.c0 = s + kWallCells;
      out.walls.push_back({false, s, r.r0, r.r1});
    }
    out.rooms[static_cast<std::size_t>(pick)] = a;
    out.rooms.push_back(b);
  }
  return out;
}

// Free-cell scratch map used while carving.
struct Carve {
  int w, h;
  std::vector<std::uint8_t> free;
  bool is_free(int r, int c) const {
    return r >= 0 && r < h && c >= 0 && c < w && free[static_cast<std::size_t>(r) * w + c];
  }
  void set(int r, int c) { free[static_cast<std::size_t>(r) * w + c] = 1; }
};

bool carve_door(Carve& m, const Wall& wall, int door, Rng& rng) {
  std::vector<int> starts;
  int run = 0;
  for (int p = wall.lo; p < wall.hi; ++p) {
    const bool open = wall.horizontal
                          ? m.is_free(wall.at - 1, p) && m.is_free(wall.at + kWallCells, p)
                          : m.is_free(p, wall.at - 1) && m.is_free(p, wall.at + kWallCells);
    run = open ? run + 1 : 0;
    if (run >= door) starts.push_back(p - door + 1);
  }
  if (starts.empty()) return false;
  const int q = starts[static_cast<std::size_t>(rng.below(starts.size()))];
  for (int p = q; p < q + door; ++p) {
    for (int k = 0; k < kWallCells; ++k) {
      if (wall.horizontal) {
        m.set(wall.at + k, p);
      } else {
        m.set(p, wall.at + k);
      }
    }
  }
  return true;
}

std::vector<RoomType> assign_room_types(std::size_t n, Rng& rng) {
  std::vector<RoomType> all;
  for (int i = 0; i < kRoomTypeCount; ++i) all.push_back(static_cast<RoomType>(i));
  rng.shuffle(std::span<RoomType>(all));
  std::vector<RoomType> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(i < all.size() ? all[i] : static_cast<RoomType>(rng.below(kRoomTypeCount)));
  }
  return out;
}

// Places one blob of `category`; returns false if no free slot was found.
bool place_blob(SemanticGrid& g, const Rect& room, CategoryId category, double wall_prob,
                Rng& rng) {
  GridCell seed{};
  bool found = false;
  for (int attempt = 0; attempt < 40 && !found; ++attempt) {
    if (rng.bernoulli(wall_prob)) {
      const int perimeter = 2 * (room.width() + room.height());
      int k = static_cast<int>(rng.below(static_cast<std::uint64_t>(perimeter)));
      if (k < room.width()) {
        seed = {room.r0, room.c0 + k};
      } else if ((k -= room.width()) < room.width()) {
        seed = {room.r1 - 1, room.c0 + k};
      } else if ((k -= room.width()) < room.height()) {
        seed = {room.r0 + k, room.c0};
      } else {
        seed = {room.r0 + k - room.height(), room.c1 - 1};
      }
    } else {
      seed = {rng.uniform_int(room.r0, room.r1 - 1), rng.uniform_int(room.c0, room.c1 - 1)};
    }
    found = g.object(seed) == kNoCategory;
  }
  if (!found) return false;
  std::vector<GridCell> blob{seed};
  g.set_cell(seed, false, category);
  const int size = rng.uniform_int(1, 3);
  constexpr std::array<std::array<int, 2>, 4> k4 = {{{-1, 0}, {0, -1}, {0, 1}, {1, 0}}};
  while (static_cast<int>(blob.size()) < size) {
    std::vector<GridCell> options;
    for (const auto& b : blob) {
      for (const auto& [dr, dc] : k4) {
        const GridCell n{b.row + dr, b.col + dc};
        if (n.row < room.r0 || n.row >= room.r1 || n.col < room.c0 || n.col >= room.c1) continue;
        if (g.object(n) != kNoCategory) continue;
        if (std::find(options.begin(), options.end(), n) == options.end()) options.push_back(n);
      }
    }
    if (options.empty()) break;
    const auto n = options[static_cast<std::size_t>(rng.below(options.size()))];
    g.set_cell(n, false, category);
    blob.push_back(n);
  }
  return true;
}

std::optional<SemanticGrid> try_generate(const SceneParams& p, Rng& rng) {
  const int w = to_cells(p.width_m, p.resolution_m);
  const int h = to_cells(p.height_m, p.resolution_m);
  const int min_side = static_cast<int>(std::ceil(p.min_room_side_m / p.resolution_m - 1e-9));
  const int door = to_cells(p.door_width_m, p.resolution_m);
  const Rect interior{kWallCells, kWallCells, h - kWallCells, w - kWallCells};

  const int target = rng.uniform_int(p.min_rooms, p.max_rooms);
  const auto layout = partition(interior, target, min_side, rng);
  if (static_cast<int>(layout.rooms.size()) < p.min_rooms) {
    throw GenerationError("cannot fit " + std::to_string(p.min_rooms) + " rooms of side " +
                          std::to_string(p.min_room_side_m) + " m into the map");
  }

  Carve m{w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h, 0)};
  for (const auto& r : layout.rooms) {
    for (int y = r.r0; y < r.r1; ++y) {
      for (int x = r.c0; x < r.c1; ++x) m.set(y, x);
    }
  }
  for (const auto& wall : layout.walls) {
    if (!carve_door(m, wall, door, rng)) return std::nullopt;
  }

  SemanticGrid g(w, h, p.resolution_m, p.categories);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) g.set_cell({y, x}, !m.is_free(y, x));
  }
  if (!free_space_connected(g)) return std::nullopt;

  const auto types = assign_room_types(layout.rooms.size(), rng);
  for (CategoryId cat = 0; cat < static_cast<CategoryId>(p.categories.size()); ++cat) {
    const bool goal = p.categories.is_goal(cat);
    const int count = goal ? rng.uniform_int(1, 3) : rng.uniform_int(0, 2);
    std::vector<double> weights(layout.rooms.size(), 0.0);
    if (static_cast<std::size_t>(cat) < p.placement_priors.size()) {
      for (const auto& prior : p.placement_priors[static_cast<std::size_t>(cat)]) {
        for (std::size_t i = 0; i < types.size(); ++i) {
          if (types[i] == prior.room) weights[i] += prior.weight;
        }
      }
    }
    for (int k = 0; k < count; ++k) {
      const auto room = layout.rooms[rng.weighted(weights)];
      if (!place_blob(g, room, cat, p.wall_adjacent_prob, rng) && goal && k == 0) {
        return std::nullopt;
      }
    }
  }
  return g;
}

}  // namespace

std::string_view room_type_name(RoomType t) { return kRoomNames[static_cast<std::size_t>(t)]; }

std::optional<RoomType> parse_room_type(std::string_view name) {
  for (std::size_t i = 0; i < kRoomNames.size(); ++i) {
    if (kRoomNames[i] == name) return static_cast<RoomType>(i);
  }
  return std::nullopt;
}

void SceneParams::validate() const {
  if (!(width_m > 0.0) || !(height_m > 0.0)) throw ArgumentError("scene width_m and height_m must be > 0");
  if (!(resolution_m > 0.0)) throw ArgumentError("scene resolution_m must be > 0");
  if (min_rooms < 1 || min_rooms > max_rooms) {
    throw ArgumentError("room count range must satisfy 1 <= min_rooms <= max_rooms");
  }
  if (to_cells(door_width_m, resolution_m) < 2) throw ArgumentError("door_width_m must span at least 2 cells");
  if (!(min_room_side_m > 0.0)) throw ArgumentError("min_room_side_m must be > 0");
  if (to_cells(door_width_m, resolution_m) + 2 > to_cells(min_room_side_m, resolution_m)) {
    throw ArgumentError("door_width_m must be smaller than min_room_side_m");
  }
  if (!(wall_adjacent_prob >= 0.0 && wall_adjacent_prob <= 1.0)) {
    throw ArgumentError("wall_adjacent_prob must lie in [0, 1]");
  }
  if (categories.size() == 0) throw ArgumentError("scene needs a category table");
  if (placement_priors.size() > categories.size()) {
    throw ArgumentError("placement_priors lists more categories than the table");
  }
  for (const auto& list : placement_priors) {
    for (const auto& prior : list) {
      if (!(prior.weight >= 0.0)) throw ArgumentError("placement prior weights must be >= 0");
    }
  }
}

CategoryTable default_category_table() {
  return CategoryTable({"chair", "couch", "potted_plant", "bed", "toilet", "tv", "table", "sink",
                        "refrigerator", "bathtub"},
                       {true, true, true, true, true, true, false, false, false, false});
}

std::vector<std::vector<PlacementPrior>> default_placement_priors() {
  using enum RoomType;
  return {
      {{kDiningRoom, 0.5}, {kOffice, 0.3}, {kLivingRoom, 0.2}},  // chair
      {{kLivingRoom, 1.0}},                                       // couch
      {{kLivingRoom, 0.5}, {kDiningRoom, 0.25}, {kOffice, 0.25}}, // potted_plant
      {{kBedroom, 1.0}},                                          // bed
      {{kBathroom, 1.0}},                                         // toilet
      {{kLivingRoom, 0.7}, {kBedroom, 0.3}},                      // tv
      {{kDiningRoom, 0.6}, {kKitchen, 0.3}, {kLivingRoom, 0.1}},  // table
      {{kKitchen, 0.6}, {kBathroom, 0.4}},                        // sink
      {{kKitchen, 1.0}},                                          // refrigerator
      {{kBathroom, 1.0}},                                         // bathtub
  };
}

SceneParams default_scene_params(std::uint64_t seed) {
  SceneParams p;
  p.seed = seed;
  p.categories = default_category_table();
  p.placement_priors = default_placement_priors();
  return p;
}

SemanticGrid generate_scene(const SceneParams& params) {
  params.validate();
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng(derive_seed(params.seed, static_cast<std::uint64_t>(attempt)));
    if (auto g = try_generate(params, rng)) return std::move(*g);
  }
  throw GenerationError("no valid layout found after " + std::to_string(kMaxAttempts) + " attempts");
}

bool free_space_connected(const SemanticGrid& grid) {
  const auto free = [&](std::size_t i) {
    return grid.explored_channel()[i] && !grid.obstacle_channel()[i];
  };
  std::size_t start = grid.size();
  std::size_t total = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!free(i)) continue;
    ++total;
    if (start == grid.size()) start = i;
  }
  if (total == 0) return true;
  std::vector<std::uint8_t> seen(grid.size(), 0);
  std::deque<std::size_t> queue{start};
  seen[start] = 1;
  std::size_t reached = 0;
  const std::size_t w = static_cast<std::size_t>(grid.width());
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    ++reached;
    const GridCell c = grid.cell_at(i);
    const std::array<GridCell, 4> next = {{{c.row - 1, c.col}, {c.row + 1, c.col},
                                           {c.row, c.col - 1}, {c.row, c.col + 1}}};
    for (const auto& n : next) {
      if (!grid.in_bounds(n)) continue;
      const std::size_t j = static_cast<std::size_t>(n.row) * w + static_cast<std::size_t>(n.col);
      if (seen[j] || !free(j)) continue;
      seen[j] = 1;
      queue.push_back(j);
    }
  }
  return reached == total;
}

SceneStats scene_stats(const SemanticGrid& grid, double door_width_m) {
  SceneStats s;
  const std::size_t free_cells = count_free_cells(grid);
  s.free_area_m2 = static_cast<double>(free_cells) * grid.resolution() * grid.resolution();

  // Chebyshev distance to the nearest obstacle or off-map cell.
  const int w = grid.width();
  const int h = grid.height();
  constexpr int kFar = std::numeric_limits<int>::max();
  std::vector<int> dist(grid.size(), kFar);
  std::deque<std::size_t> queue;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const GridCell c = grid.cell_at(i);
    if (!grid.known_free(c)) {
      dist[i] = 0;
      queue.push_back(i);
    } else if (c.row == 0 || c.col == 0 || c.row == h - 1 || c.col == w - 1) {
      dist[i] = 1;
      queue.push_back(i);
    }
  }
  while (!queue.empty()) {
    const std::size_t i = queue.front();
    queue.pop_front();
    const GridCell c = grid.cell_at(i);
    for (const auto& [dr, dc] : kNeighbors8) {
      const GridCell n{c.row + dr, c.col + dc};
      if (!grid.in_bounds(n)) continue;
      const std::size_t j = grid.index(n);
      if (dist[j] != kFar) continue;
      dist[j] = dist[i] + 1;
      queue.push_back(j);
    }
  }
  const int door = std::max(1, static_cast<int>(std::lround(door_width_m / grid.resolution())));
  const int radius = (door + 2) / 2;
  std::vector<std::uint8_t> core(grid.size(), 0);
  for (std::size_t i = 0; i < grid.size(); ++i) core[i] = dist[i] > radius;
  std::vector<std::uint8_t> seen(grid.size(), 0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!core[i] || seen[i]) continue;
    ++s.room_count;
    seen[i] = 1;
    queue.push_back(i);
    while (!queue.empty()) {
      const std::size_t k = queue.front();
      queue.pop_front();
      const GridCell c = grid.cell_at(k);
      for (const auto& [dr, dc] : kNeighbors8) {
        const GridCell n{c.row + dr, c.col + dc};
        if (!grid.in_bounds(n)) continue;
        const std::size_t j = grid.index(n);
        if (!core[j] || seen[j]) continue;
        seen[j] = 1;
        queue.push_back(j);
      }
    }
  }

  s.instance_counts.assign(grid.categories().size(), 0);
  std::fill(seen.begin(), seen.end(), 0);
  const auto obj = grid.object_channel();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (obj[i] == kNoCategory || seen[i]) continue;
    const int cat = obj[i];
    ++s.instance_counts[static_cast<std::size_t>(cat)];
    seen[i] = 1;
    queue.push_back(i);
    while (!queue.empty()) {
      const std::size_t k = queue.front();
      queue.pop_front();
      const GridCell c = grid.cell_at(k);
      for (const auto& [dr, dc] : kNeighbors8) {
        const GridCell n{c.row + dr, c.col + dc};
        if (!grid.in_bounds(n)) continue;
        const std::size_t j = grid.index(n);
        if (obj[j] != cat || seen[j]) continue;
        seen[j] = 1;
        queue.push_back(j);
      }
    }
  }
  return s;
}

}  // namespace potnav
