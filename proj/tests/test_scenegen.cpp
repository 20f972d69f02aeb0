#include <chrono>

#include "doctest.h"
#include "potnav/errors.hpp"
#include "potnav/scenegen.hpp"
#include "test_support.hpp"

using namespace potnav;

namespace {

// 4-connected free-space flood by repeated sweeps.
bool connected_by_sweeps(const SemanticGrid& g) {
  const int w = g.width(), h = g.height();
  std::vector<int> mark(g.size(), 0);
  bool seeded = false;
  for (std::size_t i = 0; i < g.size() && !seeded; ++i) {
    if (g.known_free(g.cell_at(i))) {
      mark[i] = 1;
      seeded = true;
    }
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        const int i = r * w + c;
        if (mark[i] || !g.known_free({r, c})) continue;
        if ((r > 0 && mark[i - w]) || (r + 1 < h && mark[i + w]) || (c > 0 && mark[i - 1]) ||
            (c + 1 < w && mark[i + 1])) {
          mark[i] = 1;
          changed = true;
        }
      }
  }
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.known_free(g.cell_at(i)) && !mark[i]) return false;
  return true;
}

std::vector<int> naive_instance_counts(const SemanticGrid& g) {
  std::vector<int> counts(g.categories().size(), 0);
  for (std::size_t cat = 0; cat < counts.size(); ++cat) {
    std::vector<bool> member(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      member[i] = g.object(g.cell_at(i)) == static_cast<CategoryId>(cat);
    const auto labels = testing::propagate_labels(g.width(), g.height(), member);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (labels[i] == static_cast<int>(i)) ++counts[cat];
  }
  return counts;
}

}  // namespace

TEST_CASE("generate_scene is deterministic in its params") {
  const auto a = generate_scene(default_scene_params(17));
  const auto b = generate_scene(default_scene_params(17));
  CHECK(a == b);
  CHECK(a.complete());
  CHECK(a.width() == 240);
  CHECK(a.height() == 240);
  const auto c = generate_scene(default_scene_params(18));
  CHECK_FALSE(a == c);
}

TEST_CASE("generated scenes: connectivity, goal coverage, stats") {
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const auto p = default_scene_params(seed);
    const auto g = generate_scene(p);
    CAPTURE(seed);
    CHECK(connected_by_sweeps(g));
    CHECK(free_space_connected(g));
    const auto stats = scene_stats(g);
    const auto naive = naive_instance_counts(g);
    CHECK(stats.instance_counts == naive);
    for (CategoryId cat : g.categories().goal_categories()) CHECK(naive[cat] >= 1);
    std::size_t free = 0;
    for (std::size_t i = 0; i < g.size(); ++i) free += g.known_free(g.cell_at(i));
    CHECK(stats.free_area_m2 == doctest::Approx(free * 0.05 * 0.05).epsilon(1e-12));
    CHECK(stats.room_count >= p.min_rooms);
    CHECK(stats.room_count <= p.max_rooms);
    // objects sit on free cells
    for (std::size_t i = 0; i < g.size(); ++i)
      if (g.object(g.cell_at(i)) != kNoCategory) CHECK_FALSE(g.obstacle(g.cell_at(i)));
  }
}

TEST_CASE("scene_stats on hand-built maps") {
  SUBCASE("10 m empty room") {
    SemanticGrid g(200, 200, 0.05, default_category_table());
    for (int r = 0; r < 200; ++r)
      for (int c = 0; c < 200; ++c) g.set_cell({r, c}, r < 2 || c < 2 || r >= 198 || c >= 198);
    const auto s = scene_stats(g);
    CHECK(s.free_area_m2 < 100.0);
    CHECK(s.room_count == 1);
  }
  SUBCASE("three chairs") {
    auto g = testing::grid_from_ascii({
        "##########",
        "#2......2#",
        "#2.......#",
        "#....2...#",
        "##########",
    });
    const auto s = scene_stats(g);
    CHECK(s.instance_counts[2] == 3);
    CHECK(s.instance_counts[0] == 0);
  }
}

TEST_CASE("scene parameter errors") {
  auto p = default_scene_params(1);
  p.width_m = 3.0;
  p.min_rooms = 6;
  p.max_rooms = 6;
  CHECK_THROWS_AS(generate_scene(p), GenerationError);
  p = default_scene_params(1);
  p.door_width_m = 0.05;
  CHECK_THROWS_AS(generate_scene(p), ArgumentError);
  p = default_scene_params(1);
  p.min_rooms = 5;
  p.max_rooms = 4;
  CHECK_THROWS_AS(generate_scene(p), ArgumentError);
  p = default_scene_params(1);
  p.placement_priors[0][0].weight = -1.0;
  CHECK_THROWS_AS(generate_scene(p), ArgumentError);
}

TEST_CASE("room type names round trip") {
  for (int i = 0; i < kRoomTypeCount; ++i) {
    const auto t = static_cast<RoomType>(i);
    CHECK(parse_room_type(room_type_name(t)) == t);
  }
  CHECK_FALSE(parse_room_type("garage").has_value());
}
