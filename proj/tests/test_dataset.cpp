#include <cmath>
#include <sstream>

#include "doctest.h"
#include "potnav/dataset.hpp"
#include "potnav/errors.hpp"
#include "potnav/scenegen.hpp"
#include "test_support.hpp"

using namespace potnav;
using potnav::testing::grid_from_ascii;

namespace {

SemanticGrid small_scene(std::uint64_t seed) {
  auto p = default_scene_params(seed);
  p.width_m = 6.0;
  p.height_m = 5.0;
  p.min_rooms = 2;
  p.max_rooms = 3;
  return generate_scene(p);
}

MaskParams cone_params() {
  MaskParams m;
  m.strategy = MaskStrategy::kViewCone;
  return m;
}

// Some point of `target` is visible from the centre of `from` along a segment
// whose sampled points lie in free cells (target itself excepted).
bool sampled_line_of_sight(const SemanticGrid& g, GridCell from, GridCell target, int n) {
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const double y0 = from.row + 0.5, x0 = from.col + 0.5;
      const double y1 = target.row + (iy + 0.5) / n, x1 = target.col + (ix + 0.5) / n;
      const int steps = 800;
      bool clear = true;
      for (int s = 0; s <= steps && clear; ++s) {
        const double t = static_cast<double>(s) / steps;
        const GridCell c{static_cast<int>(std::floor(y0 + t * (y1 - y0))),
                         static_cast<int>(std::floor(x0 + t * (x1 - x0)))};
        if (c == target) break;
        if (g.obstacle(c)) clear = false;
      }
      if (clear) return true;
    }
  return false;
}

}  // namespace

TEST_CASE("augment") {
  const auto g = small_scene(4);
  SUBCASE("identity") { CHECK(augment_with(g, {}) == g); }
  SUBCASE("half turn twice") { CHECK(augment_with(augment_with(g, {2, 0, 0}), {2, 0, 0}) == g); }
  SUBCASE("quarter turn keeps object counts") {
    auto p = default_scene_params(9);
    p.width_m = p.height_m = 6.0;
    const auto sq = generate_scene(p);
    const auto rot = augment_with(sq, {1, 0, 0});
    CHECK(scene_stats(rot).instance_counts == scene_stats(sq).instance_counts);
    CHECK(count_free_cells(rot) == count_free_cells(sq));
    CHECK(augment_with(augment_with(rot, {1, 0, 0}), {2, 0, 0}) == sq);
  }
  SUBCASE("off-map transform") { CHECK_THROWS_AS(augment_with(g, {0, g.height(), 0}), ArgumentError); }
  SUBCASE("sampled transforms keep free space and connectivity") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto t = sample_transform(g, seed);
      const auto a = augment_with(g, t);
      CHECK(count_free_cells(a) == count_free_cells(g));
      CHECK(free_space_connected(a));
      CHECK(scene_stats(a).instance_counts == scene_stats(g).instance_counts);
      CHECK(augment(g, seed) == a);
    }
  }
}

TEST_CASE("exploration_mask square mode") {
  const auto g = grid_from_ascii(std::vector<std::string>(30, std::string(30, '.')));
  MaskParams m;
  m.square_side_m = 0.15;  // 3 cells
  SUBCASE("single cell") {
    const auto mask = exploration_mask(g, PathPlan{{{10, 10}}, 0.0}, m);
    int n = 0;
    for (auto v : mask) n += v;
    CHECK(n == 9);
  }
  SUBCASE("straight path matches naive stamping") {
    m.square_side_m = 3.0;  // 61 cells, clipped by the map
    PathPlan path;
    for (int c = 5; c < 15; ++c) path.cells.push_back({12, c});
    const auto mask = exploration_mask(g, path, m);
    std::vector<std::uint8_t> naive(g.size(), 0);
    for (const auto& p : path.cells)
      for (int r = 0; r < 30; ++r)
        for (int c = 0; c < 30; ++c)
          if (std::abs(r - p.row) <= 30 && std::abs(c - p.col) <= 30) naive[r * 30 + c] = 1;
    CHECK(mask == naive);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(exploration_mask(g, PathPlan{}, m), ArgumentError);
    const auto walls = grid_from_ascii({"#.", ".."});
    CHECK_THROWS_AS(exploration_mask(walls, PathPlan{{{0, 0}}, 0.0}, m), ArgumentError);
  }
}

TEST_CASE("exploration_mask view-cone mode") {
  SUBCASE("cells behind a wall stay unset") {
    const auto g = grid_from_ascii({
        "....................",
        "....................",
        "..........#.........",
        "..........#.........",
        "..........#.........",
        "..........#.........",
        "....................",
    });
    PathPlan path{{{4, 2}, {4, 3}, {4, 4}}, 0.0};
    auto m = cone_params();
    m.cone_radius_m = 0.8;
    const auto mask = exploration_mask(g, path, m);
    CHECK(mask[g.index({4, 10})] == 1);  // the wall itself
    CHECK(mask[g.index({4, 9})] == 1);
    for (int c = 11; c < 20; ++c) {
      CHECK(mask[g.index({3, c})] == 0);
      CHECK(mask[g.index({4, c})] == 0);
    }
    CHECK(mask[g.index({0, 2})] == 0);  // behind the agent's field of view
  }
  SUBCASE("revealed cells are visible from some path cell on a generated scene") {
    const auto g = small_scene(2);
    const auto t = make_training_tuple(g, 3, cone_params(), PotentialParams{});
    // rebuild the same path to check against
    const auto free = known_free_mask(g);
    std::vector<GridCell> cells;
    for (std::size_t i = 0; i < free.size(); ++i)
      if (free[i]) cells.push_back(g.cell_at(i));
    const GridCell a = cells[cells.size() / 3];
    const GridCell b = cells[2 * cells.size() / 3];
    const auto path = shortest_path(distance_field(g, std::vector<GridCell>{b}, free), a);
    PathPlan shortp{{path.cells.begin(), path.cells.begin() + std::min<std::size_t>(6, path.cells.size())}, 0};
    const auto mask = exploration_mask(g, shortp, cone_params());
    int checked = 0;
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (!mask[i]) continue;
      bool seen = false;
      for (const auto& p : shortp.cells) seen = seen || sampled_line_of_sight(g, p, g.cell_at(i), 3);
      for (const auto& p : shortp.cells) seen = seen || sampled_line_of_sight(g, p, g.cell_at(i), 41);
      CHECK(seen);
      ++checked;
    }
    CHECK(checked > 100);
  }
}

TEST_CASE("mask monotonicity under path extension") {
  const auto g = small_scene(6);
  const auto free = known_free_mask(g);
  std::vector<GridCell> cells;
  for (std::size_t i = 0; i < free.size(); ++i)
    if (free[i]) cells.push_back(g.cell_at(i));
  const auto path = shortest_path(distance_field(g, std::vector<GridCell>{cells.back()}, free), cells.front());
  REQUIRE(path.cells.size() > 10);
  for (const auto& params : {MaskParams{}, cone_params()}) {
    PathPlan prefix{{path.cells.begin(), path.cells.begin() + path.cells.size() / 2}, 0};
    const auto small = exploration_mask(g, prefix, params);
    const auto big = exploration_mask(g, path, params);
    for (std::size_t i = 0; i < small.size(); ++i)
      if (small[i]) CHECK(big[i] == 1);
  }
}

TEST_CASE("training tuples") {
  const auto g = small_scene(5);
  const PotentialParams pf;
  for (const auto& m : {MaskParams{}, cone_params()}) {
    const auto t = make_training_tuple(g, 77, m, pf);
    CHECK(t == make_training_tuple(g, 77, m, pf));
    REQUIRE(t.target_objects.size() == g.categories().size());
    CHECK(t.frontier_cells == frontier_cells(t.partial));
    CHECK_FALSE(t.frontier_cells.empty());
    // revealed cells agree with the complete map
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto c = g.cell_at(i);
      if (!t.partial.explored(c)) continue;
      CHECK(t.partial.obstacle(c) == g.obstacle(c));
      CHECK(t.partial.object(c) == g.object(c));
    }
    // targets vanish off frontiers and recompute exactly
    const auto fm = frontier_mask(t.partial);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (fm[i]) continue;
      CHECK(t.target_area.values()[i] == 0.0);
      for (const auto& o : t.target_objects) CHECK(o.values()[i] == 0.0);
    }
    CHECK(t.target_area == area_potential(t.partial, g, pf));
    for (std::size_t cat = 0; cat < t.target_objects.size(); ++cat)
      CHECK(t.target_objects[cat] == object_potential(t.partial, g, static_cast<CategoryId>(cat), pf));
  }
  CHECK_THROWS_AS(make_training_tuple(grid_from_ascii({"#.#"}), 1, MaskParams{}, pf), ArgumentError);
}

TEST_CASE("generate_dataset tuples are independent of batch size") {
  const std::vector<SceneEntry> scenes{{"a", small_scene(1)}, {"b", small_scene(2)}};
  const auto three = generate_dataset(scenes, 3, 42, MaskParams{}, PotentialParams{}, true);
  const auto five = generate_dataset(scenes, 5, 42, MaskParams{}, PotentialParams{}, true);
  for (std::size_t k = 0; k < 3; ++k) CHECK(three[k] == five[k]);
  for (const auto& t : five) {
    const auto& src = t.provenance.scene_id == "a" ? scenes[0].grid : scenes[1].grid;
    const auto complete = augment_with(src, t.provenance.augmentation);
    CHECK(t.target_area == area_potential(t.partial, complete, PotentialParams{}));
  }
}

TEST_CASE("dataset container") {
  const std::vector<SceneEntry> scenes{{"s0", small_scene(3)}};
  auto tuples = generate_dataset(scenes, 4, 8, cone_params(), PotentialParams{}, true);
  // a field with values off the frontier forces the dense encoding
  tuples[1].target_objects[2].set({0, 0}, 0.25);
  SUBCASE("round trip") {
    std::stringstream buf;
    write_dataset(buf, tuples);
    CHECK(read_dataset(buf) == tuples);
  }
  SUBCASE("empty dataset") {
    std::stringstream buf;
    write_dataset(buf, {});
    CHECK(buf.str().size() == 16);
    CHECK(read_dataset(buf).empty());
  }
  SUBCASE("truncation names the failing record") {
    std::stringstream buf;
    write_dataset(buf, tuples);
    const std::string full = buf.str();
    std::stringstream one;
    write_dataset(one, std::span<const TrainingTuple>(tuples).first(1));
    // cut inside the third record
    const std::size_t first_len = one.str().size() - 16;
    std::stringstream cut(full.substr(0, 16 + 2 * first_len + 50));
    try {
      read_dataset(cut);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.record() >= 1);
      CHECK(e.record() <= 2);
      CHECK(std::string(e.what()).find("record") != std::string::npos);
    }
  }
  SUBCASE("bad magic and trailing data") {
    std::stringstream bad("XXXX0000");
    CHECK_THROWS_AS(read_dataset(bad), ParseError);
    std::stringstream buf;
    write_dataset(buf, tuples);
    std::stringstream extra(buf.str() + "x");
    CHECK_THROWS_AS(read_dataset(extra), ParseError);
  }
}
