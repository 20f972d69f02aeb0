#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "potnav/dataset.hpp"
#include "potnav/potentials.hpp"
#include "potnav/scenegen.hpp"
#include "potnav/sim.hpp"

namespace potnav {

struct SceneSettings {
  int count = 10;
  double width_m = 12.0;
  double height_m = 12.0;
  int min_rooms = 4;
  int max_rooms = 8;
  double door_width_m = 0.9;
  bool operator==(const SceneSettings&) const = default;
};

struct EpisodeSettings {
  int per_scene = 20;
  int budget_steps = 500;
  double success_radius_m = 1.0;
  double min_start_m = 2.0;
  double max_start_m = 30.0;
  int resample_every = 0;  ///< 0 = each policy's default
  bool sense_every_step = true;
  bool operator==(const EpisodeSettings&) const = default;
};

struct DatasetSettings {
  int count = 100;
  bool augment = true;
  bool operator==(const DatasetSettings&) const = default;
};

struct SeedSettings {
  std::uint64_t scene = 0;
  std::uint64_t dataset = 0;
  std::uint64_t eval = 0;
  bool operator==(const SeedSettings&) const = default;
};

/// Everything a subcommand needs besides its file arguments. Serialised as a
/// JSON object with one section per member; see docs/formats.md.
struct RunConfig {
  double resolution_m = 0.05;
  PotentialParams potentials;  ///< success_radius_m mirrors episodes.success_radius_m
  SensorParams sensors;
  MotionParams motion;
  int dilation_cells = 1;
  int lookahead_cells = 5;
  MaskParams mask;
  SceneSettings scenes;
  EpisodeSettings episodes;
  DatasetSettings dataset;
  SeedSettings seeds;

  /// Throws ConfigError naming the first offending field.
  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

/// Missing keys keep their defaults; unknown keys and wrong types throw
/// ConfigError. With `check` off, value ranges are left to a later
/// validate(), so that command-line overrides can be merged first.
RunConfig parse_config(std::string_view json_text, bool check = true);
RunConfig load_config(const std::filesystem::path& path, bool check = true);
/// Every field, pretty-printed. parse_config(dump_config(c)) == c.
std::string dump_config(const RunConfig& config);

SceneParams scene_params(const RunConfig& config, std::uint64_t seed);
SimParams sim_params(const RunConfig& config);
/// Potential params with the episode success radius.
PotentialParams potential_params(const RunConfig& config);
EvalConfig eval_config(const RunConfig& config, std::vector<PolicySpec> policies);

}  // namespace potnav
