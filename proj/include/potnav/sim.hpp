#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "potnav/dataset.hpp"
#include "potnav/geodesics.hpp"
#include "potnav/grid_map.hpp"
#include "potnav/potentials.hpp"
#include "potnav/predictor.hpp"

namespace potnav {

enum class Action { kMoveForward, kTurnLeft, kTurnRight, kStop };
std::string_view action_name(Action a);

struct Pose {
  GridCell cell;
  int heading_deg = 0;  ///< 0 faces +col, 90 faces -row
  bool operator==(const Pose&) const = default;
};

/// Continuous position in cell units; cell (r, c) spans [r, r+1) x [c, c+1).
struct Point {
  double row = 0.0;
  double col = 0.0;
};

struct MotionParams {
  double forward_m = 0.25;
  int turn_deg = 30;
  void validate() const;
  bool operator==(const MotionParams&) const = default;
};

struct SensorParams {
  double range_m = 5.0;
  double fov_deg = 90.0;
  int rays = 0;  ///< 0 picks enough rays to leave no gaps at full range
  void validate() const;
  bool operator==(const SensorParams&) const = default;
};

/// Reveals every cell crossed by the sensor rays, up to and including the
/// first obstacle on each ray.
SemanticGrid sense(const SemanticGrid& complete, const SemanticGrid& partial, const Pose& pose,
                   const SensorParams& sensors);
/// In-place form; returns the number of newly explored cells.
std::size_t sense_into(const SemanticGrid& complete, SemanticGrid& partial, const Pose& pose,
                       const SensorParams& sensors);

struct LocalPolicyParams {
  int dilation_cells = 1;   ///< growth of explored obstacles for planning
  int lookahead_cells = 5;  ///< path cell the agent steers toward
  int turn_deg = 30;
  double step_cells = 5.0;  ///< forward move length, for clearance checks
  bool operator==(const LocalPolicyParams&) const = default;
};

struct LocalStep {
  Action action = Action::kMoveForward;
  GridCell target;           ///< goal actually planned to
  bool substituted = false;  ///< goal unreachable, nearest reachable cell used
  bool at_goal = false;      ///< agent already stands on the target
};

/// Plans a dijkstra-octile path to `goal` on the partial map (unexplored
/// traversable) and steers toward a lookahead cell on the path. Each heading
/// is scored by how much closer a forward move along it (stopped by known
/// obstacles) gets to that cell; among near-best headings the one needing the
/// least rotation is chosen. Forward when already facing it, else a turn by
/// the smaller signed angle (exact reversal turns left). Never returns stop.
LocalStep local_policy_step(const SemanticGrid& partial, const Pose& pose, GridCell goal,
                            const LocalPolicyParams& params = {});
LocalStep local_policy_step(const SemanticGrid& partial, const Pose& pose, Point position,
                            GridCell goal, const LocalPolicyParams& params = {});

enum class PolicyKind { kPoni, kFbe, kAreaOnly, kObjectOnly };
std::string_view policy_kind_name(PolicyKind k);
std::optional<PolicyKind> parse_policy_kind(std::string_view name);

struct PolicySpec {
  PolicyKind kind = PolicyKind::kPoni;
  PredictorKind predictor = PredictorKind::kOracle;
  std::string external_command;  ///< non-empty selects the file-exchange predictor
  PotentialParams potentials;

  /// Goal resampling period used when the episode does not set one: 1 for
  /// the potential-field policies, 25 for fbe.
  int default_resample_every() const;
  /// Weight of the area potential actually used (1 for area_only, 0 for object_only).
  double effective_alpha() const;
  /// Kind name, suffixed with ":<predictor>" for non-oracle predictors.
  std::string name() const;
};

struct EpisodeSpec {
  std::shared_ptr<const SemanticGrid> scene;  ///< complete map
  Pose start;
  CategoryId goal = 0;
  int budget_steps = 500;
  double success_radius_m = 1.0;
  int resample_every = 0;  ///< 0 = policy default
  std::uint64_t seed = 0;  ///< drives the random-cell fallback
  /// Map known before the first observation; empty when null.
  std::shared_ptr<const SemanticGrid> initial_map;
};

struct SimParams {
  SensorParams sensors;
  MotionParams motion;
  LocalPolicyParams local;
  bool sense_every_step = true;  ///< false senses at the start pose only
  bool operator==(const SimParams&) const = default;
};

enum class StopReason { kStopped, kBudgetExhausted };
std::string_view stop_reason_name(StopReason r);

struct EpisodeResult {
  bool success = false;
  double spl = 0.0;
  double softspl = 0.0;
  double dts_m = 0.0;  ///< +inf when the goal category is absent
  double agent_path_m = 0.0;
  double oracle_path_m = 0.0;
  int steps = 0;
  std::vector<Pose> trajectory;  ///< start pose first, one entry per action
  std::vector<GridCell> goals;   ///< long-term goal in force at each action
  StopReason stop_reason = StopReason::kBudgetExhausted;
  int collisions = 0;
  int substitutions = 0;  ///< local planner replaced an unreachable goal
  int fallbacks = 0;      ///< goal sampling fell back to a frontier or random cell
};

/// Read-only per-scene data shared by many episodes: the complete map, its
/// success-zone fields (computed on demand, thread-safe) and an optional
/// predictor.
class SceneContext {
public:
  SceneContext(std::shared_ptr<const SemanticGrid> scene, double success_radius_m,
               std::shared_ptr<const Predictor> predictor = nullptr);

  const SemanticGrid& scene() const noexcept { return *scene_; }
  double success_radius_m() const noexcept { return success_radius_m_; }
  const Predictor* predictor() const noexcept { return predictor_.get(); }
  const DistanceField& zone(CategoryId category) const;
  /// Same scene, sharing the zone cache, with another predictor.
  SceneContext with_predictor(std::shared_ptr<const Predictor> predictor) const;

private:
  struct ZoneCache {
    std::mutex mutex;
    std::vector<std::unique_ptr<DistanceField>> fields;
  };
  std::shared_ptr<const SemanticGrid> scene_;
  double success_radius_m_;
  std::shared_ptr<const Predictor> predictor_;
  std::shared_ptr<ZoneCache> zones_;
};

/// Runs one episode. A context built for the same scene and success radius
/// may be passed to reuse zone fields and the predictor; without one (or
/// without a predictor in it) the policy's predictor is built here.
EpisodeResult run_episode(const PolicySpec& policy, const EpisodeSpec& spec, const SimParams& sim,
                          const SceneContext* context = nullptr);

/// success * oracle / max(agent, oracle); the ratio is 1 when both are 0.
double spl(bool success, double oracle_m, double agent_m);
/// (1 - d_final / d_init) * oracle / max(agent, oracle), clamped to [0, 1].
double soft_spl(double d_final, double d_init, double oracle_m, double agent_m);
/// Geodesic distance from `final_cell` to the success zone, >= 0.
double distance_to_success(const DistanceField& zone, GridCell final_cell);

struct EvalConfig {
  std::vector<PolicySpec> policies;
  int episodes_per_scene = 20;
  std::uint64_t seed = 0;
  SimParams sim;
  int budget_steps = 500;
  double success_radius_m = 1.0;
  double min_start_distance_m = 2.0;
  double max_start_distance_m = 30.0;
  int resample_every = 0;  ///< 0 = each policy's default
};

struct EpisodeRecord {
  std::string scene_id;
  int episode = 0;
  std::string policy;
  std::string goal;
  Pose start;
  EpisodeResult result;
};

struct PolicyAggregate {
  std::string policy;
  int episodes = 0;
  double success = 0.0;
  double spl = 0.0;
  double softspl = 0.0;
  double dts_m = 0.0;
};

struct EvalReport {
  std::vector<EpisodeRecord> episodes;
  std::vector<PolicyAggregate> aggregate;
};

/// Samples episode specs per scene (goal category present, start with
/// success-zone distance in the configured range) and runs every policy on
/// the identical specs.
EvalReport evaluate(std::span<const SceneEntry> scenes, const EvalConfig& config);

}  // namespace potnav
