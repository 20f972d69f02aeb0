#include <cmath>
#include <random>

#include "doctest.h"
#include "potnav/errors.hpp"
#include "potnav/geodesics.hpp"
#include "test_support.hpp"

using namespace potnav;
using potnav::testing::grid_from_ascii;

namespace {

SemanticGrid open_grid(int w, int h, double res = 0.05) {
  return grid_from_ascii(std::vector<std::string>(h, std::string(w, '.')), res);
}

}  // namespace

TEST_CASE("distance_field single steps") {
  const auto g = open_grid(5, 5);
  const std::vector<GridCell> src{{2, 2}};
  const auto f = distance_field(g, src, known_free_mask(g));
  CHECK(f.at({2, 2}) == 0.0);
  CHECK(f.at({2, 3}) == doctest::Approx(0.05).epsilon(1e-15));
  CHECK(f.at({3, 3}) == doctest::Approx(0.05 * std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("distance_field straight line on a 20x20 open grid") {
  const auto g = open_grid(20, 20);
  const std::vector<GridCell> src{{5, 2}};
  const auto d = distance_field(g, src, known_free_mask(g));
  CHECK(d.at({5, 12}) == doctest::Approx(10 * 0.05).epsilon(1e-14));
  const auto fmm = distance_field(g, src, known_free_mask(g), DistanceMode::kFmmUpwind);
  CHECK(std::abs(fmm.at({5, 12}) - 0.5) <= 0.05 * 0.5);
}

TEST_CASE("distance_field argument errors") {
  const auto g = grid_from_ascii({"..#", "..."});
  const auto mask = known_free_mask(g);
  CHECK_THROWS_AS(distance_field(g, std::vector<GridCell>{}, mask), ArgumentError);
  CHECK_THROWS_AS(distance_field(g, std::vector<GridCell>{{0, 2}}, mask), ArgumentError);
  CHECK_THROWS_AS(distance_field(g, std::vector<GridCell>{{5, 0}}, mask), ArgumentError);
}

TEST_CASE("no corner cutting between two blocked axial cells") {
  const auto g = grid_from_ascii({
      ".#.",
      "#..",
      "...",
  });
  const auto f = distance_field(g, std::vector<GridCell>{{0, 0}}, known_free_mask(g));
  CHECK(f.at({1, 1}) == kUnreachable);
  // predicate overload gives the same field
  const auto f2 = distance_field(g, std::vector<GridCell>{{0, 0}},
                                 [&](GridCell c) { return g.known_free(c); });
  CHECK(std::equal(f.values().begin(), f.values().end(), f2.values().begin()));
}

TEST_CASE("shortest_path") {
  SUBCASE("start on a source") {
    const auto g = open_grid(4, 4);
    const auto f = distance_field(g, std::vector<GridCell>{{1, 1}}, known_free_mask(g));
    const auto p = shortest_path(f, {1, 1});
    CHECK(p.cells.size() == 1);
    CHECK(p.length_m == 0.0);
  }
  SUBCASE("straight corridor") {
    const auto g = grid_from_ascii({"##########", "..........", "##########"});
    const auto f = distance_field(g, std::vector<GridCell>{{1, 0}}, known_free_mask(g));
    const auto p = shortest_path(f, {1, 9});
    REQUIRE(p.cells.size() == 10);
    for (int i = 0; i < 10; ++i) CHECK(p.cells[i] == GridCell{1, 9 - i});
    CHECK(p.length_m == f.at({1, 9}));
  }
  SUBCASE("walled-off pocket") {
    const auto g = grid_from_ascii({"...#.", "...#.", "...#."});
    const auto f = distance_field(g, std::vector<GridCell>{{0, 0}}, known_free_mask(g));
    CHECK_THROWS_AS(shortest_path(f, {1, 4}), NoPathError);
  }
  SUBCASE("tie-break prefers smallest (row, col)") {
    const auto g = open_grid(3, 3);
    const auto f = distance_field(g, std::vector<GridCell>{{0, 1}, {2, 1}}, known_free_mask(g));
    const auto p = shortest_path(f, {1, 1});
    REQUIRE(p.cells.size() == 2);
    CHECK(p.cells[1] == GridCell{0, 1});
  }
}

TEST_CASE("success_zone_distance") {
  // Two rooms joined by a doorway; toilet (category 0) in the right room.
  const auto g = grid_from_ascii({
      "##################################",
      "#...............#................#",
      "#...............#................#",
      "#...............#.............0..#",
      "#................................#",
      "#................................#",
      "#...............#................#",
      "#...............#................#",
      "##################################",
  });
  const double ds = 0.2;  // 4 cells
  SUBCASE("inside the zone") {
    const auto f = success_zone_distance(g, 0, ds);
    CHECK(f.at({3, 30}) == 0.0);
    CHECK(f.at({3, 27}) == 0.0);
  }
  SUBCASE("absent category") {
    const auto f = success_zone_distance(g, 1, ds);
    for (double v : f.values()) CHECK(v == kUnreachable);
  }
  SUBCASE("unknown category") {
    CHECK_THROWS_AS(success_zone_distance(g, 17, ds), ArgumentError);
  }
  SUBCASE("across the doorway matches a relaxation oracle") {
    const auto free = testing::free_cells(g);
    const auto to_obj = testing::relax_distances(g.width(), g.height(), g.resolution(), free, {{3, 30}});
    std::vector<std::pair<int, int>> zone;
    for (std::size_t i = 0; i < free.size(); ++i)
      if (free[i] && to_obj[i] <= ds + 1e-9) zone.push_back({g.cell_at(i).row, g.cell_at(i).col});
    const auto oracle = testing::relax_distances(g.width(), g.height(), g.resolution(), free, zone);
    const auto f = success_zone_distance(g, 0, ds);
    for (std::size_t i = 0; i < free.size(); ++i) {
      if (!free[i]) continue;
      CHECK(f.values()[i] == doctest::Approx(oracle[i]).epsilon(1e-12));
    }
    CHECK(f.at({2, 3}) > 1.0);
  }
  SUBCASE("requires a complete map") {
    auto partial = SemanticGrid(3, 3, 0.05, testing::small_table());
    CHECK_THROWS_AS(success_zone_distance(partial, 0, ds), ArgumentError);
  }
}

TEST_CASE("nearest_target") {
  const auto g = open_grid(9, 9);
  std::vector<std::uint8_t> targets(g.size(), 0);
  targets[g.index({1, 4})] = 1;  // 3 cells above
  targets[g.index({4, 1})] = 1;  // 3 cells left, same distance
  targets[g.index({8, 8})] = 1;
  const auto nt = nearest_target(g, {4, 4}, known_free_mask(g), targets);
  REQUIRE(nt.has_value());
  CHECK(nt->cell == GridCell{1, 4});
  CHECK(nt->distance_m == doctest::Approx(0.15));
  std::vector<std::uint8_t> none(g.size(), 0);
  CHECK_FALSE(nearest_target(g, {4, 4}, known_free_mask(g), none).has_value());
}

TEST_CASE("geodesic properties") {
  std::mt19937 rng(42);
  SUBCASE("octile bound on open grids") {
    const auto g = open_grid(60, 60);
    const auto mask = known_free_mask(g);
    std::uniform_int_distribution<int> coord(0, 59);
    for (int i = 0; i < 100; ++i) {
      GridCell a{coord(rng), coord(rng)};
      GridCell b{coord(rng), coord(rng)};
      if (a == b) b = {(a.row + 7) % 60, a.col};
      const auto f = distance_field(g, std::vector<GridCell>{a}, mask);
      const double euclid = g.resolution() * std::hypot(a.row - b.row, a.col - b.col);
      const double ratio = f.at(b) / euclid;
      CHECK(ratio >= 1.0 - 1e-12);
      CHECK(ratio <= 1.083);
    }
  }
  SUBCASE("fmm agrees with dijkstra-octile within 10% on open grids") {
    const auto g = open_grid(50, 40);
    const auto mask = known_free_mask(g);
    for (int i = 0; i < 5; ++i) {
      const GridCell s{static_cast<int>(rng() % 40), static_cast<int>(rng() % 50)};
      const auto d = distance_field(g, std::vector<GridCell>{s}, mask);
      const auto f = distance_field(g, std::vector<GridCell>{s}, mask, DistanceMode::kFmmUpwind);
      for (std::size_t k = 0; k < g.size(); ++k) {
        if (d.values()[k] == 0.0) continue;
        CHECK(std::abs(f.values()[k] - d.values()[k]) <= 0.10 * d.values()[k]);
      }
    }
  }
  SUBCASE("random obstacle grids: oracle agreement, path length, symmetry, consistency") {
    for (int trial = 0; trial < 25; ++trial) {
      auto [complete, unused] = testing::random_pair(rng, 12 + trial % 7, 10 + trial % 5, 0.25, 0.0);
      const auto mask = known_free_mask(complete);
      std::vector<GridCell> free;
      for (std::size_t i = 0; i < complete.size(); ++i)
        if (mask[i]) free.push_back(complete.cell_at(i));
      if (free.size() < 2) continue;
      const GridCell a = free[rng() % free.size()];
      const GridCell b = free[rng() % free.size()];
      const auto fa = distance_field(complete, std::vector<GridCell>{a}, mask);
      const auto fb = distance_field(complete, std::vector<GridCell>{b}, mask);
      CHECK(fa.at(b) == fb.at(a));

      const auto oracle = testing::relax_distances(complete.width(), complete.height(),
                                                   complete.resolution(), testing::free_cells(complete),
                                                   {{a.row, a.col}});
      for (std::size_t k = 0; k < complete.size(); ++k) {
        if (oracle[k] == kUnreachable) {
          CHECK(fa.values()[k] == kUnreachable);
        } else {
          CHECK(fa.values()[k] == doctest::Approx(oracle[k]).epsilon(1e-12));
        }
      }
      for (const auto& c : free) {
        if (!fa.reachable(c)) continue;
        const auto p = shortest_path(fa, c);
        CHECK(p.length_m == fa.at(c));
        CHECK(p.cells.front() == c);
        CHECK(p.cells.back() == a);
        for (std::size_t s = 1; s < p.cells.size(); ++s) {
          CHECK(std::abs(p.cells[s].row - p.cells[s - 1].row) <= 1);
          CHECK(std::abs(p.cells[s].col - p.cells[s - 1].col) <= 1);
          CHECK(fa.at(p.cells[s]) < fa.at(p.cells[s - 1]));
          CHECK(complete.known_free(p.cells[s]));
        }
        // Triangle consistency with every neighbour.
        for (const auto& [dr, dc] : kNeighbors8) {
          const GridCell n{c.row + dr, c.col + dc};
          if (!complete.in_bounds(n) || !fa.reachable(n)) continue;
          if (dr && dc && !mask[complete.index({c.row + dr, c.col})] &&
              !mask[complete.index({c.row, c.col + dc})])
            continue;
          const double step = (dr && dc ? std::sqrt(2.0) : 1.0) * complete.resolution();
          CHECK(fa.at(c) <= fa.at(n) + step + 1e-12);
        }
      }
      // Early-stopping field yields the identical path.
      const auto until = distance_field_until(complete, std::vector<GridCell>{a}, mask, b);
      if (fa.reachable(b)) {
        const auto p1 = shortest_path(fa, b);
        const auto p2 = shortest_path(until, b);
        CHECK(p1.cells == p2.cells);
        CHECK(p1.length_m == p2.length_m);
      }
    }
  }
}

TEST_CASE("distance_field_near is exact around the target") {
  std::mt19937 rng(404);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    auto [complete, unused] = testing::random_pair(rng, 30, 24, 0.2, 0.0);
    const auto free = testing::free_cells(complete);
    std::vector<GridCell> cells;
    for (std::size_t i = 0; i < complete.size(); ++i)
      if (free[i]) cells.push_back(complete.cell_at(i));
    if (cells.size() < 2) continue;
    const GridCell src = cells[rng() % cells.size()];
    const GridCell target = cells[rng() % cells.size()];
    const std::vector<GridCell> sources{src};
    const double radius = 4 * complete.resolution();
    const auto near = distance_field_near(complete, sources, known_free_mask(complete), target, radius);
    const auto oracle = testing::relax_distances(complete.width(), complete.height(), complete.resolution(), free,
                                                 {{src.row, src.col}});
    const double dt = oracle[complete.index(target)];
    if (std::isinf(dt)) {
      CHECK_FALSE(near.reachable(target));
      continue;
    }
    CHECK(near.at(target) == doctest::Approx(dt).epsilon(1e-12));
    for (std::size_t i = 0; i < complete.size(); ++i) {
      const auto c = complete.cell_at(i);
      const int dr = std::abs(c.row - target.row), dc = std::abs(c.col - target.col);
      const double octile = (std::max(dr, dc) - std::min(dr, dc) + std::sqrt(2.0) * std::min(dr, dc)) * complete.resolution();
      if (!free[i] || octile > radius || oracle[i] > dt + radius) continue;
      CHECK(near.values()[i] == doctest::Approx(oracle[i]).epsilon(1e-12));
      ++checked;
    }
    // the path from the target is the one taken on the full field
    const auto full = distance_field(complete, sources, known_free_mask(complete));
    CHECK(shortest_path(near, target).cells == shortest_path(full, target).cells);
  }
  CHECK(checked > 100);
}
