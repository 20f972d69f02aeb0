#include "potnav/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "potnav/errors.hpp"
#include "potnav/raycast.hpp"
#include "potnav/rng.hpp"

namespace potnav {

namespace {

constexpr std::string_view kActionNames[] = {"move_forward", "turn_left", "turn_right", "stop"};
constexpr std::string_view kPolicyNames[] = {"poni", "fbe", "area_only", "object_only"};
constexpr std::string_view kStopNames[] = {"stopped", "budget_exhausted"};

// Sampling step, in cells, when sweeping a forward move for collisions.
constexpr double kMoveSampleCells = 0.05;
// Margin below d_s for the stop rule, so stops never land on the zone edge
// through rounding.
constexpr double kStopMargin = 1e-9;
// Forward moves whose progress toward the aim point is this close (cells) to
// the best are treated as equally good.
constexpr double kProgressSlack = 0.25;
// Smallest progress (cells) that counts as moving toward the target.
constexpr double kMinProgress = 0.5;
// Half-width, in cells, of the square around a reached goal that is not
// sampled again.
constexpr int kExhaustRadius = 2;

GridCell cell_of(Point p) {
  return {static_cast<int>(std::floor(p.row)), static_cast<int>(std::floor(p.col))};
}

Point centre_of(GridCell c) { return {c.row + 0.5, c.col + 0.5}; }

int wrap_heading(int h) { return ((h % 360) + 360) % 360; }

bool is_frontier(const SemanticGrid& g, GridCell c) {
  if (!g.known_free(c)) return false;
  for (const auto& d : kNeighbors8) {
    const GridCell n{c.row + d[0], c.col + d[1]};
    if (g.in_bounds(n) && !g.explored(n)) return true;
  }
  return false;
}

std::vector<GridCell> cells_of_category(const SemanticGrid& g, CategoryId category) {
  std::vector<GridCell> out;
  const auto objects = g.object_channel();
  const auto explored = g.explored_channel();
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (explored[i] && objects[i] == category) out.push_back(g.cell_at(i));
  }
  return out;
}

struct Sweep {
  Point end;
  std::optional<GridCell> blocked;
};

// Moves a point from `from` along `heading` for up to `dist` cells, stopping
// at the last sample before an obstacle of `g` (or the map edge). A sample
// that skips diagonally past a corner is blocked by either side cell.
Sweep sweep(const SemanticGrid& g, Point from, int heading, double dist) {
  const auto dir = heading_direction(heading);
  const int n = std::max(1, static_cast<int>(std::ceil(dist / kMoveSampleCells)));
  Sweep out{from, std::nullopt};
  GridCell last_cell = cell_of(from);
  for (int k = 1; k <= n; ++k) {
    const double s = dist * k / n;
    const Point p{from.row + dir.drow * s, from.col + dir.dcol * s};
    const GridCell c = cell_of(p);
    if (c != last_cell) {
      if (!g.in_bounds(c) || g.obstacle(c)) {
        out.blocked = c;
        return out;
      }
      if (c.row != last_cell.row && c.col != last_cell.col) {
        for (const GridCell side : {GridCell{last_cell.row, c.col}, GridCell{c.row, last_cell.col}}) {
          if (g.obstacle(side)) {
            out.blocked = side;
            return out;
          }
        }
      }
    }
    out.end = p;
    last_cell = c;
  }
  return out;
}

// Signed smallest rotation from `from` to `to` in (-180, 180].
double angle_diff(double to, double from) {
  double d = std::remainder(to - from, 360.0);
  if (d <= -180.0) d += 360.0;
  return d;
}

// Chooses among headings whose score is within `slack` of the best: the
// smallest rotation wins, then the left turn.
int pick_heading(const std::vector<double>& score, double slack, int heading, int turn_deg) {
  const double top = *std::max_element(score.begin(), score.end());
  int best = heading;
  std::pair<double, int> best_key{1e9, 1};
  for (std::size_t k = 0; k < score.size(); ++k) {
    if (score[k] < top - slack) continue;
    const int h = static_cast<int>(k) * turn_deg;
    const double turn = angle_diff(h, heading);
    const std::pair<double, int> key{std::abs(turn), turn >= 0.0 ? 0 : 1};
    if (key < best_key) {
      best_key = key;
      best = h;
    }
  }
  return best;
}

// Scores each heading by the descent of `field` over a forward move swept
// against the known map. When no heading descends (the agent is pinned
// against an obstacle the field routes around), the least-bad move that
// travels is taken; failing that, straight-line progress toward the
// lookahead cell, then a left turn.
LocalStep steer(const SemanticGrid& partial, const DistanceField& field, GridCell target,
                const std::vector<GridCell>& path, Point position, int heading,
                const LocalPolicyParams& params) {
  LocalStep step;
  step.target = target;
  const double res = partial.resolution();
  const int n = 360 / params.turn_deg;
  std::vector<Point> ends(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) ends[static_cast<std::size_t>(k)] = sweep(partial, position, k * params.turn_deg, params.step_cells).end;

  // Cells inside the obstacle dilation carry no field value; estimate them
  // through the best traversable cell within the dilation radius.
  const int radius = std::max(1, params.dilation_cells);
  const auto value_at = [&](GridCell c) {
    if (!field.in_bounds(c)) return kUnreachable;
    double v = field.at(c);
    if (v != kUnreachable) return v;
    for (int dr = -radius; dr <= radius; ++dr) {
      for (int dc = -radius; dc <= radius; ++dc) {
        const GridCell n{c.row + dr, c.col + dc};
        if (!field.in_bounds(n) || partial.obstacle(n)) continue;
        const double w = field.at(n);
        if (w != kUnreachable) v = std::min(v, w + res * std::hypot(dr, dc));
      }
    }
    return v;
  };
  const double here = value_at(cell_of(position));
  std::vector<double> score(ends.size());
  for (std::size_t k = 0; k < ends.size(); ++k) {
    const double v = value_at(cell_of(ends[k]));
    score[k] = v == kUnreachable ? -1e9 : here - v;
  }
  double slack = kProgressSlack * res;
  if (*std::max_element(score.begin(), score.end()) < kMinProgress * res) {
    // Pinned: take the least-bad move that actually travels, so the next
    // position can descend.
    bool any = false;
    for (std::size_t k = 0; k < ends.size(); ++k) {
      const double moved = std::hypot(ends[k].row - position.row, ends[k].col - position.col);
      if (moved < kMinProgress) score[k] = -1e9;
      any = any || score[k] > -1e9;
    }
    if (!any) {
      const std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(params.lookahead_cells),
                                                  path.size() - 1);
      const Point aim = centre_of(path[i]);
      const double gap = std::hypot(aim.row - position.row, aim.col - position.col);
      for (std::size_t k = 0; k < ends.size(); ++k) {
        score[k] = gap - std::hypot(aim.row - ends[k].row, aim.col - ends[k].col);
      }
      slack = kProgressSlack;
      if (*std::max_element(score.begin(), score.end()) < kMinProgress) {
        step.action = Action::kTurnLeft;
        return step;
      }
    }
  }
  const int best = pick_heading(score, slack, heading, params.turn_deg);
  if (best == heading) {
    step.action = Action::kMoveForward;
  } else {
    step.action = angle_diff(best, heading) > 0.0 ? Action::kTurnLeft : Action::kTurnRight;
  }
  return step;
}

}  // namespace

std::string_view action_name(Action a) { return kActionNames[static_cast<std::size_t>(a)]; }
std::string_view policy_kind_name(PolicyKind k) { return kPolicyNames[static_cast<std::size_t>(k)]; }
std::string_view stop_reason_name(StopReason r) { return kStopNames[static_cast<std::size_t>(r)]; }

std::optional<PolicyKind> parse_policy_kind(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kPolicyNames); ++i) {
    if (kPolicyNames[i] == name) return static_cast<PolicyKind>(i);
  }
  return std::nullopt;
}

void MotionParams::validate() const {
  if (!(forward_m > 0.0) || !std::isfinite(forward_m)) throw ArgumentError("motion.forward_m must be > 0");
  if (turn_deg <= 0 || turn_deg >= 360 || 360 % turn_deg != 0) {
    throw ArgumentError("motion.turn_deg must divide 360");
  }
}

void SensorParams::validate() const {
  if (!(range_m > 0.0) || !std::isfinite(range_m)) throw ArgumentError("sensors.range_m must be > 0");
  if (!(fov_deg > 0.0) || fov_deg > 360.0) throw ArgumentError("sensors.fov_deg must be in (0, 360]");
  if (rays < 0 || rays == 1 || rays == 2) throw ArgumentError("sensors.rays must be 0 or >= 3");
}

std::size_t sense_into(const SemanticGrid& complete, SemanticGrid& partial, const Pose& pose,
                       const SensorParams& sensors) {
  sensors.validate();
  require_same_shape(complete, partial, "sense");
  if (!complete.in_bounds(pose.cell) || complete.obstacle(pose.cell)) {
    throw ArgumentError("sense: pose cell is not free");
  }
  const double range_cells = sensors.range_m / complete.resolution();
  const int rays = sensors.rays ? sensors.rays : rays_for(sensors.fov_deg, range_cells);
  std::vector<GridCell> cells;
  const bool full = sensors.fov_deg >= 360.0;
  for (int k = 0; k < rays; ++k) {
    const double offset = full ? 360.0 * k / rays
                               : -sensors.fov_deg / 2.0 + sensors.fov_deg * k / (rays - 1);
    trace_ray(complete, pose.cell, heading_direction(pose.heading_deg + offset), range_cells, cells);
  }
  // rays overlap heavily near the agent; drop what is already known
  const auto known = partial.explored_channel();
  std::erase_if(cells, [&](const GridCell& c) { return known[partial.index(c)] != 0; });
  return reveal_into(partial, complete, cells);
}

SemanticGrid sense(const SemanticGrid& complete, const SemanticGrid& partial, const Pose& pose,
                   const SensorParams& sensors) {
  SemanticGrid out = partial;
  sense_into(complete, out, pose, sensors);
  return out;
}

LocalStep local_policy_step(const SemanticGrid& partial, const Pose& pose, GridCell goal,
                            const LocalPolicyParams& params) {
  return local_policy_step(partial, pose, centre_of(pose.cell), goal, params);
}

LocalStep local_policy_step(const SemanticGrid& partial, const Pose& pose, Point position,
                            GridCell goal, const LocalPolicyParams& params) {
  if (!partial.in_bounds(goal)) throw ArgumentError("local policy: goal out of bounds");
  if (!partial.in_bounds(pose.cell)) throw ArgumentError("local policy: pose out of bounds");
  if (params.dilation_cells < 0 || params.lookahead_cells < 1 || params.turn_deg <= 0) {
    throw ArgumentError("local policy: invalid parameters");
  }
  const GridCell agent = pose.cell;
  const auto at_goal = [&](GridCell target, bool substituted) {
    LocalStep s;
    s.action = Action::kTurnLeft;
    s.target = target;
    s.substituted = substituted;
    s.at_goal = true;
    return s;
  };
  if (agent == goal) return at_goal(goal, false);

  // steering reads field values around the swept end points; octile radius,
  // with room for the diagonal of the dilation square
  const double reach = 1.5 * (params.step_cells + params.dilation_cells + 2) * partial.resolution();
  const std::vector<GridCell> goal_src{goal};
  for (int dilation : {params.dilation_cells, 0}) {
    auto mask = planning_mask(partial, dilation);
    mask[partial.index(agent)] = 1;
    mask[partial.index(goal)] = 1;
    const auto field = distance_field_near(partial, goal_src, mask, agent, reach);
    if (field.reachable(agent)) {
      return steer(partial, field, goal, shortest_path(field, agent).cells, position, pose.heading_deg,
                   params);
    }
    if (dilation == 0) break;
  }

  // Unreachable: plan to the reachable cell closest to the goal instead.
  auto mask = planning_mask(partial, 0);
  mask[partial.index(agent)] = 1;
  const std::vector<GridCell> agent_src{agent};
  const auto from_agent = distance_field(partial, agent_src, mask);
  GridCell best = agent;
  long best_d2 = std::numeric_limits<long>::max();
  const auto dist = from_agent.values();
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] == kUnreachable) continue;
    const GridCell c = partial.cell_at(i);
    const long dr = c.row - goal.row, dc = c.col - goal.col;
    const long d2 = dr * dr + dc * dc;
    if (d2 < best_d2) {
      best_d2 = d2;
      best = c;
    }
  }
  if (best == agent) return at_goal(best, true);
  const std::vector<GridCell> best_src{best};
  const auto field = distance_field_near(partial, best_src, mask, agent, reach);
  auto step = steer(partial, field, best, shortest_path(field, agent).cells, position, pose.heading_deg,
                    params);
  step.substituted = true;
  return step;
}

int PolicySpec::default_resample_every() const { return kind == PolicyKind::kFbe ? 25 : 1; }

double PolicySpec::effective_alpha() const {
  switch (kind) {
    case PolicyKind::kAreaOnly: return 1.0;
    case PolicyKind::kObjectOnly: return 0.0;
    default: return potentials.alpha;
  }
}

std::string PolicySpec::name() const {
  std::string n(policy_kind_name(kind));
  if (kind == PolicyKind::kFbe) return n;
  if (!external_command.empty()) return n + ":external";
  if (predictor != PredictorKind::kOracle) n += ":" + std::string(predictor_kind_name(predictor));
  return n;
}

SceneContext::SceneContext(std::shared_ptr<const SemanticGrid> scene, double success_radius_m,
                           std::shared_ptr<const Predictor> predictor)
    : scene_(std::move(scene)), success_radius_m_(success_radius_m), predictor_(std::move(predictor)),
      zones_(std::make_shared<ZoneCache>()) {
  if (!scene_) throw ArgumentError("scene context: no scene");
  if (!scene_->complete()) throw ArgumentError("scene context: scene map is not complete");
  if (!(success_radius_m_ > 0.0)) throw ArgumentError("success_radius_m must be > 0");
  zones_->fields.resize(scene_->categories().size());
}

SceneContext SceneContext::with_predictor(std::shared_ptr<const Predictor> predictor) const {
  SceneContext out(*this);
  out.predictor_ = std::move(predictor);
  return out;
}

const DistanceField& SceneContext::zone(CategoryId category) const {
  if (!scene_->categories().contains(category)) {
    throw ArgumentError("unknown category id " + std::to_string(category));
  }
  std::lock_guard lock(zones_->mutex);
  auto& slot = zones_->fields[static_cast<std::size_t>(category)];
  if (!slot) {
    slot = std::make_unique<DistanceField>(success_zone_distance(*scene_, category, success_radius_m_));
  }
  return *slot;
}

double spl(bool success, double oracle_m, double agent_m) {
  if (!success) return 0.0;
  const double denom = std::max(agent_m, oracle_m);
  return denom > 0.0 ? oracle_m / denom : 1.0;
}

double soft_spl(double d_final, double d_init, double oracle_m, double agent_m) {
  if (!std::isfinite(d_init) || !std::isfinite(d_final)) return 0.0;
  const double progress = d_init > 0.0 ? 1.0 - d_final / d_init : (d_final > 0.0 ? 0.0 : 1.0);
  const double denom = std::max(agent_m, oracle_m);
  const double ratio = denom > 0.0 ? oracle_m / denom : 1.0;
  return std::clamp(progress * ratio, 0.0, 1.0);
}

double distance_to_success(const DistanceField& zone, GridCell final_cell) {
  return std::max(zone.at(final_cell), 0.0);
}

namespace {

class Episode {
public:
  Episode(const PolicySpec& policy, const EpisodeSpec& spec, const SimParams& sim,
          const SceneContext& ctx, const Predictor* predictor)
      : policy_(policy), spec_(spec), sim_(sim), ctx_(ctx), world_(ctx.scene()),
        predictor_(predictor), zone_(ctx.zone(spec.goal)), rng_(spec.seed),
        partial_(spec.initial_map ? *spec.initial_map
                                  : SemanticGrid(world_.width(), world_.height(), world_.resolution(),
                                                 world_.categories())),
        pos_(centre_of(spec.start.cell)), heading_(spec.start.heading_deg) {
    require_same_shape(world_, partial_, "initial map");
    pf_params_ = policy.potentials;
    pf_params_.alpha = policy.effective_alpha();
    resample_every_ = spec.resample_every > 0 ? spec.resample_every : policy.default_resample_every();
    exhausted_.assign(partial_.size(), 0);
    local_ = sim.local;
    local_.turn_deg = sim.motion.turn_deg;
    local_.step_cells = sim.motion.forward_m / world_.resolution();
  }

  EpisodeResult run() {
    EpisodeResult r;
    r.oracle_path_m = zone_.at(spec_.start.cell);
    r.trajectory.push_back(pose());
    sense_into(world_, partial_, pose(), sim_.sensors);

    int since_resample = 0;
    for (int t = 0; t < spec_.budget_steps; ++t) {
      Action action = Action::kMoveForward;
      const GridCell agent = pose().cell;
      const auto seen = cells_of_category(partial_, spec_.goal);
      if (!seen.empty()) {
        if (within_stop_distance(seen, agent)) {
          action = Action::kStop;
        } else if (!goal_ || partial_.object(*goal_) != spec_.goal || !partial_.explored(*goal_)) {
          goal_ = nearest_of(seen, agent);
        }
      } else if (!goal_ || since_resample >= resample_every_ || consumed(*goal_)) {
        goal_ = sample_goal(agent, r);
        since_resample = 0;
      }

      if (action != Action::kStop) {
        auto step = local_policy_step(partial_, pose(), pos_, *goal_, local_);
        if (step.at_goal && seen.empty()) {
          // Standing on the goal without having resolved it (e.g. a frontier
          // whose unknown neighbour is hidden behind a corner): never pick it
          // again and choose a fresh one.
          exhaust(step.target);
          goal_ = sample_goal(agent, r);
          since_resample = 0;
          step = local_policy_step(partial_, pose(), pos_, *goal_, local_);
        }
        if (step.substituted) ++r.substitutions;
        action = step.action;
      }
      r.goals.push_back(goal_ ? *goal_ : agent);

      execute(action, r);
      ++r.steps;
      ++since_resample;
      if (sim_.sense_every_step) sense_into(world_, partial_, pose(), sim_.sensors);
      r.trajectory.push_back(pose());
      if (action == Action::kStop) {
        r.stop_reason = StopReason::kStopped;
        break;
      }
    }

    const GridCell final_cell = pose().cell;
    r.dts_m = distance_to_success(zone_, final_cell);
    r.success = r.stop_reason == StopReason::kStopped && r.dts_m == 0.0;
    r.spl = spl(r.success, r.oracle_path_m, r.agent_path_m);
    r.softspl = soft_spl(r.dts_m, r.oracle_path_m, r.oracle_path_m, r.agent_path_m);
    return r;
  }

private:
  Pose pose() const { return {cell_of(pos_), heading_}; }

  bool within_stop_distance(const std::vector<GridCell>& seen, GridCell agent) const {
    const auto free = known_free_mask(partial_);
    const auto field = distance_field_near(partial_, seen, free, agent, 0.0);
    return field.at(agent) <= ctx_.success_radius_m() - kStopMargin;
  }

  GridCell nearest_of(const std::vector<GridCell>& targets, GridCell agent) const {
    std::vector<std::uint8_t> flags(partial_.size(), 0);
    for (const auto& c : targets) flags[partial_.index(c)] = 1;
    auto mask = planning_mask(partial_, 0);
    mask[partial_.index(agent)] = 1;
    const auto n = nearest_target(partial_, agent, mask, flags);
    return n ? n->cell : targets.front();
  }

  // A goal stops being useful once it is explored and no longer on a frontier.
  bool consumed(GridCell g) const { return partial_.explored(g) && !is_frontier(partial_, g); }

  void exhaust(GridCell g) {
    for (int dr = -kExhaustRadius; dr <= kExhaustRadius; ++dr) {
      for (int dc = -kExhaustRadius; dc <= kExhaustRadius; ++dc) {
        const GridCell c{g.row + dr, g.col + dc};
        if (partial_.in_bounds(c)) exhausted_[partial_.index(c)] = 1;
      }
    }
  }

  GridCell sample_goal(GridCell agent, EpisodeResult& r) {
    auto frontiers = frontier_mask(partial_);
    if (policy_.kind != PolicyKind::kFbe) {
      const auto p = predictor_->predict(partial_, spec_.goal);
      auto u = combine(p.area, p.object, pf_params_);
      auto values = u.values();
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (exhausted_[i]) values[i] = 0.0;
      }
      if (auto g = sample_long_term_goal(u, partial_, agent, frontiers)) return *g;
      ++r.fallbacks;
    }
    auto mask = planning_mask(partial_, 0);
    mask[partial_.index(agent)] = 1;
    for (std::size_t i = 0; i < frontiers.size(); ++i) {
      if (exhausted_[i]) frontiers[i] = 0;
    }
    if (const auto n = nearest_target(partial_, agent, mask, frontiers)) return n->cell;
    if (policy_.kind == PolicyKind::kFbe) ++r.fallbacks;
    const auto free = known_free_mask(partial_);
    std::vector<GridCell> cells;
    for (std::size_t i = 0; i < free.size(); ++i) {
      if (free[i]) cells.push_back(partial_.cell_at(i));
    }
    return cells[static_cast<std::size_t>(rng_.below(cells.size()))];
  }

  void execute(Action action, EpisodeResult& r) {
    switch (action) {
      case Action::kTurnLeft: heading_ = wrap_heading(heading_ + sim_.motion.turn_deg); return;
      case Action::kTurnRight: heading_ = wrap_heading(heading_ - sim_.motion.turn_deg); return;
      case Action::kStop: return;
      case Action::kMoveForward: break;
    }
    const auto moved = sweep(world_, pos_, heading_, sim_.motion.forward_m / world_.resolution());
    r.agent_path_m += std::hypot(moved.end.row - pos_.row, moved.end.col - pos_.col) * world_.resolution();
    pos_ = moved.end;
    if (moved.blocked) {
      ++r.collisions;
      if (world_.in_bounds(*moved.blocked)) {
        const GridCell b = *moved.blocked;
        reveal_into(partial_, world_, std::span<const GridCell>(&b, 1));
      }
    }
  }

  const PolicySpec& policy_;
  const EpisodeSpec& spec_;
  const SimParams& sim_;
  const SceneContext& ctx_;
  const SemanticGrid& world_;
  const Predictor* predictor_;
  const DistanceField& zone_;
  Rng rng_;
  SemanticGrid partial_;
  PotentialParams pf_params_;
  int resample_every_ = 1;
  LocalPolicyParams local_;
  Point pos_;
  int heading_;
  std::optional<GridCell> goal_;
  std::vector<std::uint8_t> exhausted_;
};

std::unique_ptr<Predictor> build_predictor(const PolicySpec& policy, const SemanticGrid& scene) {
  if (!policy.external_command.empty()) return std::make_unique<ExternalPredictor>(policy.external_command);
  return make_predictor(policy.predictor, &scene, policy.potentials);
}

}  // namespace

EpisodeResult run_episode(const PolicySpec& policy, const EpisodeSpec& spec, const SimParams& sim,
                          const SceneContext* context) {
  if (!spec.scene) throw ArgumentError("episode: no scene");
  const SemanticGrid& world = *spec.scene;
  if (!world.complete()) throw ArgumentError("episode: scene map is not complete");
  if (spec.budget_steps <= 0) throw ArgumentError("episode: budget_steps must be > 0");
  if (spec.resample_every < 0) throw ArgumentError("episode: resample_every must be >= 0");
  if (!world.in_bounds(spec.start.cell) || world.obstacle(spec.start.cell)) {
    throw ArgumentError("episode: start cell is not free");
  }
  sim.motion.validate();
  sim.sensors.validate();
  if (spec.start.heading_deg < 0 || spec.start.heading_deg >= 360 ||
      spec.start.heading_deg % sim.motion.turn_deg != 0) {
    throw ArgumentError("episode: start heading is not a multiple of the turn angle");
  }
  if (!world.categories().contains(spec.goal)) throw ArgumentError("episode: unknown goal category");
  policy.potentials.validate();

  std::optional<SceneContext> own_ctx;
  if (!context || &context->scene() != &world || context->success_radius_m() != spec.success_radius_m) {
    own_ctx.emplace(spec.scene, spec.success_radius_m);
    context = &*own_ctx;
  }
  std::unique_ptr<Predictor> own_predictor;
  const Predictor* predictor = context->predictor();
  if (policy.kind != PolicyKind::kFbe && !predictor) {
    own_predictor = build_predictor(policy, world);
    predictor = own_predictor.get();
  }
  return Episode(policy, spec, sim, *context, predictor).run();
}

EvalReport evaluate(std::span<const SceneEntry> scenes, const EvalConfig& config) {
  if (scenes.empty()) throw ArgumentError("evaluate: no scenes");
  if (config.policies.empty()) throw ArgumentError("evaluate: no policies");
  if (config.episodes_per_scene <= 0) throw ArgumentError("evaluate: episodes must be > 0");
  if (!(config.min_start_distance_m <= config.max_start_distance_m)) {
    throw ArgumentError("evaluate: empty start distance range");
  }
  EvalReport report;
  for (std::size_t si = 0; si < scenes.size(); ++si) {
    const auto scene = std::make_shared<const SemanticGrid>(scenes[si].grid);
    const SceneContext shared(scene, config.success_radius_m);
    std::vector<std::unique_ptr<SceneContext>> contexts;
    for (const auto& p : config.policies) {
      std::shared_ptr<const Predictor> pred;
      if (p.kind != PolicyKind::kFbe) pred = build_predictor(p, *scene);
      contexts.push_back(std::make_unique<SceneContext>(shared.with_predictor(pred)));
    }

    std::vector<CategoryId> present;
    for (CategoryId c : scene->categories().goal_categories()) {
      if (!cells_of_category(*scene, c).empty()) present.push_back(c);
    }
    if (present.empty()) {
      throw ArgumentError("evaluate: scene " + scenes[si].id + " has no goal instance");
    }
    const auto free = known_free_mask(*scene);
    std::vector<GridCell> free_cells;
    for (std::size_t i = 0; i < free.size(); ++i) {
      if (free[i]) free_cells.push_back(scene->cell_at(i));
    }

    for (int e = 0; e < config.episodes_per_scene; ++e) {
      const std::uint64_t ep_seed = derive_seed(derive_seed(config.seed, si), static_cast<std::uint64_t>(e));
      Rng rng(ep_seed);
      EpisodeSpec spec;
      spec.scene = scene;
      spec.budget_steps = config.budget_steps;
      spec.success_radius_m = config.success_radius_m;
      spec.resample_every = config.resample_every;
      spec.seed = derive_seed(ep_seed, 1);
      bool found = false;
      for (int attempt = 0; attempt < 10000 && !found; ++attempt) {
        const CategoryId cat = present[static_cast<std::size_t>(rng.below(present.size()))];
        const GridCell start = free_cells[static_cast<std::size_t>(rng.below(free_cells.size()))];
        const double d = shared.zone(cat).at(start);
        if (d >= config.min_start_distance_m && d <= config.max_start_distance_m) {
          spec.goal = cat;
          spec.start = {start, config.sim.motion.turn_deg *
                                   static_cast<int>(rng.below(static_cast<std::uint64_t>(360 / config.sim.motion.turn_deg)))};
          found = true;
        }
      }
      if (!found) {
        throw GenerationError("evaluate: no start within the distance range in scene " + scenes[si].id);
      }
      for (std::size_t pi = 0; pi < config.policies.size(); ++pi) {
        EpisodeRecord rec;
        rec.scene_id = scenes[si].id;
        rec.episode = e;
        rec.policy = config.policies[pi].name();
        rec.goal = scene->categories().name(spec.goal);
        rec.start = spec.start;
        rec.result = run_episode(config.policies[pi], spec, config.sim, contexts[pi].get());
        report.episodes.push_back(std::move(rec));
      }
    }
  }

  for (std::size_t pi = 0; pi < config.policies.size(); ++pi) {
    PolicyAggregate agg;
    agg.policy = config.policies[pi].name();
    for (std::size_t k = pi; k < report.episodes.size(); k += config.policies.size()) {
      const auto& r = report.episodes[k].result;
      ++agg.episodes;
      agg.success += r.success ? 1.0 : 0.0;
      agg.spl += r.spl;
      agg.softspl += r.softspl;
      agg.dts_m += r.dts_m;
    }
    const double n = agg.episodes;
    agg.success /= n;
    agg.spl /= n;
    agg.softspl /= n;
    agg.dts_m /= n;
    report.aggregate.push_back(agg);
  }
  return report;
}

}  // namespace potnav
