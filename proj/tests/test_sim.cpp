#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "doctest.h"
#include "potnav/errors.hpp"
#include "potnav/scenegen.hpp"
#include "potnav/sim.hpp"
#include "test_support.hpp"

using namespace potnav;
using potnav::testing::grid_from_ascii;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SemanticGrid complete_from_ascii(const std::vector<std::string>& rows) {
  auto g = grid_from_ascii(rows);
  REQUIRE(g.complete());
  return g;
}

SemanticGrid small_scene(std::uint64_t seed) {
  auto p = default_scene_params(seed);
  p.width_m = 6.0;
  p.height_m = 5.0;
  p.min_rooms = 2;
  p.max_rooms = 3;
  return generate_scene(p);
}

// Free cells within d_s of an instance, by relaxation sweeps; distance from
// `cell` to the nearest such cell, or +inf.
double oracle_zone_distance(const SemanticGrid& complete, CategoryId cat, double d_s, GridCell cell) {
  const auto free = testing::free_cells(complete);
  std::vector<std::pair<int, int>> inst;
  for (std::size_t i = 0; i < complete.size(); ++i) {
    const auto c = complete.cell_at(i);
    if (complete.object(c) == cat) inst.emplace_back(c.row, c.col);
  }
  if (inst.empty()) return kInf;
  const auto to_inst = testing::relax_distances(complete.width(), complete.height(), complete.resolution(), free, inst);
  std::vector<std::pair<int, int>> zone;
  for (std::size_t i = 0; i < complete.size(); ++i) {
    if (free[i] && to_inst[i] <= d_s + 1e-9) zone.emplace_back(complete.cell_at(i).row, complete.cell_at(i).col);
  }
  if (zone.empty()) return kInf;
  const auto to_zone = testing::relax_distances(complete.width(), complete.height(), complete.resolution(), free, zone);
  return to_zone[complete.index(cell)];
}

std::vector<std::string> room(int w, int h) {
  std::vector<std::string> rows(h, "#" + std::string(w - 2, '.') + "#");
  rows.front() = rows.back() = std::string(w, '#');
  return rows;
}

}  // namespace

TEST_CASE("spl and soft spl") {
  CHECK(spl(true, 10.0, 20.0) == 0.5);
  CHECK(spl(true, 10.0, 5.0) == 1.0);
  CHECK(spl(false, 10.0, 20.0) == 0.0);
  CHECK(spl(true, 0.0, 0.0) == 1.0);
  CHECK(soft_spl(0.0, 4.0, 10.0, 20.0) == spl(true, 10.0, 20.0));
  CHECK(soft_spl(2.0, 4.0, 10.0, 10.0) == 0.5);
  CHECK(soft_spl(8.0, 4.0, 10.0, 10.0) == 0.0);
  CHECK(soft_spl(kInf, kInf, kInf, 3.0) == 0.0);
}

TEST_CASE("distance to success is zero exactly inside the zone") {
  auto rows = room(30, 12);
  rows[5][4] = '0';
  const auto complete = complete_from_ascii(rows);
  const auto zone = success_zone_distance(complete, 0, 0.5);
  for (std::size_t i = 0; i < complete.size(); ++i) {
    const auto c = complete.cell_at(i);
    if (complete.obstacle(c)) continue;
    const double oracle = oracle_zone_distance(complete, 0, 0.5, c);
    const double d = distance_to_success(zone, c);
    CHECK((d == 0.0) == (oracle == 0.0));
    CHECK(d == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("sense stops at the first wall") {
  const auto complete = complete_from_ascii({
      "#######",
      "#.#...#",
      "#.#...#",
      "#.#...#",
      "#######",
  });
  SemanticGrid partial(complete.width(), complete.height(), complete.resolution(), complete.categories());
  const auto seen = sense(complete, partial, {{2, 1}, 0}, SensorParams{});
  CHECK(seen.explored({2, 2}));
  CHECK(seen.obstacle({2, 2}));
  for (int r = 1; r <= 3; ++r)
    for (int c = 3; c <= 5; ++c) CHECK_FALSE(seen.explored({r, c}));
  CHECK_THROWS_AS(sense(complete, partial, {{2, 2}, 0}, SensorParams{}), ArgumentError);
}

TEST_CASE("360 degree sensing reveals a small room at once and is idempotent") {
  const auto complete = complete_from_ascii(room(10, 10));
  SemanticGrid partial(10, 10, complete.resolution(), complete.categories());
  SensorParams s;
  s.fov_deg = 360.0;
  CHECK(sense_into(complete, partial, {{4, 5}, 0}, s) > 0);
  for (int r = 1; r <= 8; ++r)
    for (int c = 1; c <= 8; ++c) CHECK(partial.known_free({r, c}));
  const auto before = partial;
  CHECK(sense_into(complete, partial, {{4, 5}, 0}, s) == 0);
  CHECK(partial == before);
}

TEST_CASE("local policy basic directions") {
  const auto g = grid_from_ascii(room(14, 11));
  SUBCASE("goal ahead moves forward") {
    CHECK(local_policy_step(g, {{5, 2}, 0}, GridCell{5, 11}).action == Action::kMoveForward);
    CHECK(local_policy_step(g, {{8, 5}, 90}, GridCell{1, 5}).action == Action::kMoveForward);
  }
  SUBCASE("goal behind turns, ties to the left") {
    CHECK(local_policy_step(g, {{5, 10}, 0}, GridCell{5, 1}).action == Action::kTurnLeft);
  }
  SUBCASE("goal to the side turns toward it") {
    CHECK(local_policy_step(g, {{5, 6}, 0}, GridCell{1, 6}).action == Action::kTurnLeft);
    CHECK(local_policy_step(g, {{5, 6}, 0}, GridCell{9, 6}).action == Action::kTurnRight);
  }
  SUBCASE("standing on the goal") {
    const auto s = local_policy_step(g, {{5, 6}, 0}, GridCell{5, 6});
    CHECK(s.at_goal);
    CHECK(s.action != Action::kStop);
  }
}

TEST_CASE("local policy follows the geodesic through a door") {
  // Wall at column 8 with a door near the top (rows 1-4); goal straight across.
  auto rows = room(17, 16);
  for (int r = 5; r < 15; ++r) rows[r][8] = '#';
  const auto up = grid_from_ascii(rows);
  CHECK(local_policy_step(up, {{10, 4}, 0}, GridCell{10, 13}).action == Action::kTurnLeft);

  auto flipped = rows;
  std::reverse(flipped.begin(), flipped.end());
  const auto down = grid_from_ascii(flipped);
  CHECK(local_policy_step(down, {{5, 4}, 0}, GridCell{5, 13}).action == Action::kTurnRight);
}

TEST_CASE("local policy substitutes an unreachable goal") {
  const auto g = grid_from_ascii({
      "#######",
      "#...#.#",
      "#...#.#",
      "#######",
  });
  const auto s = local_policy_step(g, {{1, 1}, 0}, GridCell{1, 5});
  CHECK(s.substituted);
  CHECK(s.target != GridCell{1, 5});
}

TEST_CASE("episode on a revealed map") {
  auto rows = room(40, 12);
  rows[5][30] = '0';
  auto scene = std::make_shared<SemanticGrid>(complete_from_ascii(rows));
  EpisodeSpec spec;
  spec.scene = scene;
  spec.goal = 0;
  spec.success_radius_m = 0.25;
  SimParams sim;

  SUBCASE("start inside the zone stops at once") {
    spec.start = {{5, 28}, 0};
    const auto r = run_episode(PolicySpec{}, spec, sim);
    CHECK(r.success);
    CHECK(r.steps == 1);
    CHECK(r.stop_reason == StopReason::kStopped);
    CHECK(r.spl == 1.0);
    CHECK(r.dts_m == 0.0);
  }
  SUBCASE("walks to the goal and stops") {
    spec.start = {{5, 3}, 0};
    const auto r = run_episode(PolicySpec{}, spec, sim);
    CHECK(r.success);
    CHECK(r.oracle_path_m == doctest::Approx(oracle_zone_distance(*scene, 0, 0.25, {5, 3})));
    CHECK(r.agent_path_m >= r.oracle_path_m - 1e-9);
    CHECK(r.spl > 0.8);
    CHECK(r.collisions == 0);
  }
  SUBCASE("budget exhaustion") {
    spec.start = {{5, 3}, 0};
    spec.budget_steps = 3;
    const auto r = run_episode(PolicySpec{}, spec, sim);
    CHECK_FALSE(r.success);
    CHECK(r.spl == 0.0);
    CHECK(r.dts_m > 0.0);
    CHECK(r.steps == 3);
    CHECK(r.stop_reason == StopReason::kBudgetExhausted);
  }
  SUBCASE("goal sequence is stable with sensing off on a revealed map") {
    spec.start = {{9, 3}, 0};
    spec.initial_map = scene;
    sim.sense_every_step = false;
    for (auto kind : {PolicyKind::kPoni, PolicyKind::kFbe}) {
      PolicySpec p;
      p.kind = kind;
      const auto r = run_episode(p, spec, sim);
      REQUIRE_FALSE(r.goals.empty());
      for (const auto& g : r.goals) CHECK(g == r.goals.front());
      CHECK(r.success);
    }
  }
  SUBCASE("invalid specs") {
    spec.start = {{0, 0}, 0};
    CHECK_THROWS_AS(run_episode(PolicySpec{}, spec, sim), ArgumentError);
    spec.start = {{5, 3}, 45};
    CHECK_THROWS_AS(run_episode(PolicySpec{}, spec, sim), ArgumentError);
    spec.start = {{5, 3}, 0};
    spec.budget_steps = 0;
    CHECK_THROWS_AS(run_episode(PolicySpec{}, spec, sim), ArgumentError);
  }
}

TEST_CASE("fbe never succeeds on an absent category") {
  auto rows = room(24, 14);
  for (int r = 1; r < 9; ++r) rows[r][12] = '#';
  rows[3][18] = '0';
  auto scene = std::make_shared<SemanticGrid>(complete_from_ascii(rows));
  EpisodeSpec spec;
  spec.scene = scene;
  spec.goal = 1;
  spec.start = {{4, 4}, 0};
  spec.budget_steps = 120;
  PolicySpec fbe;
  fbe.kind = PolicyKind::kFbe;
  const auto r = run_episode(fbe, spec, SimParams{});
  CHECK_FALSE(r.success);
  CHECK(r.spl == 0.0);
  CHECK(r.dts_m == kInf);
  CHECK(r.steps <= 120);
}

TEST_CASE("episode invariants on generated scenes") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    auto scene = std::make_shared<SemanticGrid>(small_scene(seed));
    const SceneEntry entry{"s" + std::to_string(seed), *scene};
    EvalConfig cfg;
    cfg.episodes_per_scene = 2;
    cfg.seed = seed;
    cfg.budget_steps = 150;
    cfg.min_start_distance_m = 1.0;
    for (auto kind : {PolicyKind::kPoni, PolicyKind::kFbe, PolicyKind::kAreaOnly, PolicyKind::kObjectOnly}) {
      PolicySpec p;
      p.kind = kind;
      cfg.policies.push_back(p);
    }
    const auto report = evaluate(std::span<const SceneEntry>(&entry, 1), cfg);
    REQUIRE(report.episodes.size() == 8);
    for (const auto& rec : report.episodes) {
      const auto& r = rec.result;
      CAPTURE(rec.policy);
      CHECK(r.trajectory.size() == static_cast<std::size_t>(r.steps) + 1);
      CHECK(r.goals.size() == static_cast<std::size_t>(r.steps));
      for (const auto& pose : r.trajectory) CHECK_FALSE(scene->obstacle(pose.cell));
      CHECK(r.spl >= 0.0);
      CHECK(r.spl <= 1.0);
      CHECK(r.softspl >= 0.0);
      CHECK(r.softspl <= 1.0);
      CHECK(r.agent_path_m >= 0.0);
      const auto cat = *scene->categories().find(rec.goal);
      const double oracle_dts = oracle_zone_distance(*scene, cat, cfg.success_radius_m, r.trajectory.back().cell);
      CHECK(r.dts_m == doctest::Approx(oracle_dts).epsilon(1e-9));
      CHECK((r.dts_m == 0.0) == (oracle_dts == 0.0));
      CHECK(r.success == (r.stop_reason == StopReason::kStopped && oracle_dts == 0.0));
      const double start_d = oracle_zone_distance(*scene, cat, cfg.success_radius_m, rec.start.cell);
      CHECK(start_d >= cfg.min_start_distance_m - 1e-9);
      CHECK(start_d <= cfg.max_start_distance_m + 1e-9);
      CHECK(r.oracle_path_m == doctest::Approx(start_d).epsilon(1e-9));
      if (r.success) CHECK(r.softspl == r.spl);
    }
  }
}

TEST_CASE("agent path grows monotonically with the budget") {
  auto scene = std::make_shared<SemanticGrid>(small_scene(21));
  EpisodeSpec spec;
  spec.scene = scene;
  spec.goal = *scene->categories().find("bed");
  for (std::size_t i = 0; i < scene->size(); ++i) {
    if (!scene->obstacle(scene->cell_at(i))) {
      spec.start = {scene->cell_at(i), 0};
      break;
    }
  }
  PolicySpec fbe;
  fbe.kind = PolicyKind::kFbe;
  double last = 0.0;
  int last_steps = 0;
  for (int budget : {1, 5, 20, 60}) {
    spec.budget_steps = budget;
    const auto r = run_episode(fbe, spec, SimParams{});
    CHECK(r.agent_path_m >= last);
    CHECK(r.steps >= last_steps);
    last = r.agent_path_m;
    last_steps = r.steps;
  }
}

TEST_CASE("evaluate is deterministic and independent of policy order") {
  const SceneEntry entry{"a", small_scene(31)};
  EvalConfig cfg;
  cfg.episodes_per_scene = 2;
  cfg.seed = 77;
  cfg.budget_steps = 120;
  cfg.min_start_distance_m = 1.0;
  PolicySpec poni, fbe;
  fbe.kind = PolicyKind::kFbe;
  cfg.policies = {poni, fbe};
  const auto a = evaluate(std::span<const SceneEntry>(&entry, 1), cfg);
  const auto b = evaluate(std::span<const SceneEntry>(&entry, 1), cfg);
  cfg.policies = {fbe, poni};
  const auto swapped = evaluate(std::span<const SceneEntry>(&entry, 1), cfg);
  REQUIRE(a.episodes.size() == 4);
  REQUIRE(a.aggregate.size() == 2);
  for (std::size_t i = 0; i < a.episodes.size(); ++i) {
    CHECK(a.episodes[i].result.trajectory == b.episodes[i].result.trajectory);
    CHECK(a.episodes[i].result.spl == b.episodes[i].result.spl);
    // pairs (poni, fbe) become (fbe, poni)
    const auto& s = swapped.episodes[i ^ 1];
    CHECK(a.episodes[i].policy == s.policy);
    CHECK(a.episodes[i].start == s.start);
    CHECK(a.episodes[i].result.trajectory == s.result.trajectory);
    CHECK(a.episodes[i].result.agent_path_m == s.result.agent_path_m);
  }
  CHECK(a.aggregate[0].spl == swapped.aggregate[1].spl);

  cfg.policies = {poni};
  CHECK(evaluate(std::span<const SceneEntry>(&entry, 1), cfg).aggregate.size() == 1);
}

TEST_CASE("policy names") {
  PolicySpec p;
  CHECK(p.name() == "poni");
  p.predictor = PredictorKind::kUniformFrontier;
  CHECK(p.name() == "poni:uniform-frontier");
  p.kind = PolicyKind::kFbe;
  CHECK(p.name() == "fbe");
  CHECK(p.default_resample_every() == 25);
  for (auto k : {PolicyKind::kPoni, PolicyKind::kFbe, PolicyKind::kAreaOnly, PolicyKind::kObjectOnly})
    CHECK(parse_policy_kind(policy_kind_name(k)) == k);
  CHECK_FALSE(parse_policy_kind("random").has_value());
}
