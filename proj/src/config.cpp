#include "potnav/config.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "potnav/errors.hpp"

namespace potnav {
namespace {

using nlohmann::json;

// Reads the keys of one JSON object, remembering which were used so that
// leftovers can be reported as unknown.
class Section {
public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(label() + " must be an object");
  }

  void read(const char* key, double& out) {
    if (const json* v = take(key)) {
      if (!v->is_number()) throw ConfigError(field(key) + " must be a number");
      out = v->get<double>();
    }
  }
  void read(const char* key, int& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer()) throw ConfigError(field(key) + " must be an integer");
      const auto x = v->get<long long>();
      if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
        throw ConfigError(field(key) + " is out of range");
      }
      out = static_cast<int>(x);
    }
  }
  void read(const char* key, std::uint64_t& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_unsigned()) throw ConfigError(field(key) + " must be a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }
  void read(const char* key, bool& out) {
    if (const json* v = take(key)) {
      if (!v->is_boolean()) throw ConfigError(field(key) + " must be true or false");
      out = v->get<bool>();
    }
  }
  void read(const char* key, std::optional<double>& out) {
    if (const json* v = take(key)) {
      if (v->is_null()) {
        out.reset();
      } else if (v->is_number()) {
        out = v->get<double>();
      } else {
        throw ConfigError(field(key) + " must be a number or null");
      }
    }
  }
  void read(const char* key, std::string& out) {
    if (const json* v = take(key)) {
      if (!v->is_string()) throw ConfigError(field(key) + " must be a string");
      out = v->get<std::string>();
    }
  }
  /// Nested object, or nullptr when absent.
  const json* child(const char* key) { return take(key); }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.contains(k)) throw ConfigError("unknown config key: " + field(k));
    }
  }

  std::string field(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

private:
  std::string label() const { return path_.empty() ? "config" : path_; }
  const json* take(const char* key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const json& j_;
  std::string path_;
  std::set<std::string, std::less<>> seen_;
};

template <typename F>
void section(Section& parent, const char* key, F&& body) {
  if (const json* v = parent.child(key)) {
    Section s(*v, parent.field(key));
    body(s);
    s.finish();
  }
}

std::string_view area_norm_name(AreaNorm n) {
  return n == AreaNorm::kTotalFreeSpace ? "total_free_space" : "fixed_constant";
}

std::string_view mask_name(MaskStrategy m) {
  return m == MaskStrategy::kSquare ? "square" : "view_cone";
}

// Module validators throw ArgumentError with their own wording; re-raise as
// ConfigError under the section name unless the message already carries it.
template <typename F>
void check(std::string_view section_name, F&& f) {
  try {
    f();
  } catch (const ArgumentError& e) {
    const std::string msg = e.what();
    const std::string prefix = std::string(section_name) + ".";
    throw ConfigError(msg.starts_with(prefix) ? msg : std::string(section_name) + ": " + msg);
  }
}

}  // namespace

void RunConfig::validate() const {
  if (!(resolution_m > 0.0) || !std::isfinite(resolution_m)) throw ConfigError("resolution_m must be > 0");
  check("potentials", [&] { potential_params(*this).validate(); });
  check("sensors", [&] { sensors.validate(); });
  check("motion", [&] { motion.validate(); });
  if (dilation_cells < 0) throw ConfigError("local.dilation_cells must be >= 0");
  if (lookahead_cells < 1) throw ConfigError("local.lookahead_cells must be >= 1");
  check("mask", [&] { mask.validate(); });
  if (scenes.count < 1) throw ConfigError("scenes.count must be >= 1");
  check("scenes", [&] { scene_params(*this, 0).validate(); });
  if (episodes.per_scene < 1) throw ConfigError("episodes.per_scene must be >= 1");
  if (episodes.budget_steps < 1) throw ConfigError("episodes.budget_steps must be >= 1");
  if (!(episodes.success_radius_m >= 0.0)) throw ConfigError("episodes.success_radius_m must be >= 0");
  if (!(episodes.min_start_m >= 0.0 && episodes.min_start_m <= episodes.max_start_m)) {
    throw ConfigError("episodes.min_start_m and max_start_m must satisfy 0 <= min <= max");
  }
  if (episodes.resample_every < 0) throw ConfigError("episodes.resample_every must be >= 0");
  if (dataset.count < 1) throw ConfigError("dataset.count must be >= 1");
}

RunConfig parse_config(std::string_view json_text, bool check) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  Section top(root, "");
  top.read("resolution_m", c.resolution_m);
  section(top, "potentials", [&](Section& s) {
    s.read("alpha", c.potentials.alpha);
    s.read("d_max_m", c.potentials.d_max);
    s.read("beta", c.potentials.beta);
    s.read("gamma", c.potentials.gamma);
    std::string norm(area_norm_name(c.potentials.area_norm));
    s.read("area_norm", norm);
    if (norm == "total_free_space") {
      c.potentials.area_norm = AreaNorm::kTotalFreeSpace;
    } else if (norm == "fixed_constant") {
      c.potentials.area_norm = AreaNorm::kFixedConstant;
    } else {
      throw ConfigError("potentials.area_norm must be total_free_space or fixed_constant");
    }
    s.read("area_norm_constant_m2", c.potentials.area_norm_constant_m2);
  });
  section(top, "sensors", [&](Section& s) {
    s.read("range_m", c.sensors.range_m);
    s.read("fov_deg", c.sensors.fov_deg);
    s.read("rays", c.sensors.rays);
  });
  section(top, "motion", [&](Section& s) {
    s.read("forward_m", c.motion.forward_m);
    s.read("turn_deg", c.motion.turn_deg);
  });
  section(top, "local", [&](Section& s) {
    s.read("dilation_cells", c.dilation_cells);
    s.read("lookahead_cells", c.lookahead_cells);
  });
  section(top, "mask", [&](Section& s) {
    std::string strategy(mask_name(c.mask.strategy));
    s.read("strategy", strategy);
    if (strategy == "square") {
      c.mask.strategy = MaskStrategy::kSquare;
    } else if (strategy == "view_cone") {
      c.mask.strategy = MaskStrategy::kViewCone;
    } else {
      throw ConfigError("mask.strategy must be square or view_cone");
    }
    s.read("square_side_m", c.mask.square_side_m);
    s.read("cone_radius_m", c.mask.cone_radius_m);
    s.read("cone_fov_deg", c.mask.cone_fov_deg);
    s.read("heading_window", c.mask.heading_window);
  });
  section(top, "scenes", [&](Section& s) {
    s.read("count", c.scenes.count);
    s.read("width_m", c.scenes.width_m);
    s.read("height_m", c.scenes.height_m);
    s.read("min_rooms", c.scenes.min_rooms);
    s.read("max_rooms", c.scenes.max_rooms);
    s.read("door_width_m", c.scenes.door_width_m);
  });
  section(top, "episodes", [&](Section& s) {
    s.read("per_scene", c.episodes.per_scene);
    s.read("budget_steps", c.episodes.budget_steps);
    s.read("success_radius_m", c.episodes.success_radius_m);
    s.read("min_start_m", c.episodes.min_start_m);
    s.read("max_start_m", c.episodes.max_start_m);
    s.read("resample_every", c.episodes.resample_every);
    s.read("sense_every_step", c.episodes.sense_every_step);
  });
  section(top, "dataset", [&](Section& s) {
    s.read("count", c.dataset.count);
    s.read("augment", c.dataset.augment);
  });
  section(top, "seeds", [&](Section& s) {
    s.read("scene", c.seeds.scene);
    s.read("dataset", c.seeds.dataset);
    s.read("eval", c.seeds.eval);
  });
  top.finish();
  c.potentials.success_radius_m = c.episodes.success_radius_m;
  if (check) c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path, bool check) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), check);
}

std::string dump_config(const RunConfig& c) {
  // ordered_json keeps the section order stable and readable
  nlohmann::ordered_json j;
  j["resolution_m"] = c.resolution_m;
  auto& p = j["potentials"];
  p["alpha"] = c.potentials.alpha;
  p["d_max_m"] = c.potentials.d_max;
  p["beta"] = c.potentials.beta ? nlohmann::ordered_json(*c.potentials.beta) : nullptr;
  p["gamma"] = c.potentials.gamma ? nlohmann::ordered_json(*c.potentials.gamma) : nullptr;
  p["area_norm"] = area_norm_name(c.potentials.area_norm);
  p["area_norm_constant_m2"] = c.potentials.area_norm_constant_m2;
  j["sensors"] = {{"range_m", c.sensors.range_m}, {"fov_deg", c.sensors.fov_deg}, {"rays", c.sensors.rays}};
  j["motion"] = {{"forward_m", c.motion.forward_m}, {"turn_deg", c.motion.turn_deg}};
  j["local"] = {{"dilation_cells", c.dilation_cells}, {"lookahead_cells", c.lookahead_cells}};
  j["mask"] = {{"strategy", mask_name(c.mask.strategy)},
               {"square_side_m", c.mask.square_side_m},
               {"cone_radius_m", c.mask.cone_radius_m},
               {"cone_fov_deg", c.mask.cone_fov_deg},
               {"heading_window", c.mask.heading_window}};
  j["scenes"] = {{"count", c.scenes.count},
                 {"width_m", c.scenes.width_m},
                 {"height_m", c.scenes.height_m},
                 {"min_rooms", c.scenes.min_rooms},
                 {"max_rooms", c.scenes.max_rooms},
                 {"door_width_m", c.scenes.door_width_m}};
  j["episodes"] = {{"per_scene", c.episodes.per_scene},
                   {"budget_steps", c.episodes.budget_steps},
                   {"success_radius_m", c.episodes.success_radius_m},
                   {"min_start_m", c.episodes.min_start_m},
                   {"max_start_m", c.episodes.max_start_m},
                   {"resample_every", c.episodes.resample_every},
                   {"sense_every_step", c.episodes.sense_every_step}};
  j["dataset"] = {{"count", c.dataset.count}, {"augment", c.dataset.augment}};
  j["seeds"] = {{"scene", c.seeds.scene}, {"dataset", c.seeds.dataset}, {"eval", c.seeds.eval}};
  return j.dump(2) + "\n";
}

SceneParams scene_params(const RunConfig& c, std::uint64_t seed) {
  SceneParams p = default_scene_params(seed);
  p.width_m = c.scenes.width_m;
  p.height_m = c.scenes.height_m;
  p.resolution_m = c.resolution_m;
  p.min_rooms = c.scenes.min_rooms;
  p.max_rooms = c.scenes.max_rooms;
  p.door_width_m = c.scenes.door_width_m;
  return p;
}

SimParams sim_params(const RunConfig& c) {
  SimParams s;
  s.sensors = c.sensors;
  s.motion = c.motion;
  s.local.dilation_cells = c.dilation_cells;
  s.local.lookahead_cells = c.lookahead_cells;
  s.local.turn_deg = c.motion.turn_deg;
  s.local.step_cells = c.motion.forward_m / c.resolution_m;
  s.sense_every_step = c.episodes.sense_every_step;
  return s;
}

PotentialParams potential_params(const RunConfig& c) {
  PotentialParams p = c.potentials;
  p.success_radius_m = c.episodes.success_radius_m;
  return p;
}

EvalConfig eval_config(const RunConfig& c, std::vector<PolicySpec> policies) {
  EvalConfig e;
  for (auto& p : policies) p.potentials = potential_params(c);
  e.policies = std::move(policies);
  e.episodes_per_scene = c.episodes.per_scene;
  e.seed = c.seeds.eval;
  e.sim = sim_params(c);
  e.budget_steps = c.episodes.budget_steps;
  e.success_radius_m = c.episodes.success_radius_m;
  e.min_start_distance_m = c.episodes.min_start_m;
  e.max_start_distance_m = c.episodes.max_start_m;
  e.resample_every = c.episodes.resample_every;
  return e;
}

}  // namespace potnav
