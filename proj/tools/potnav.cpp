// potnav command-line front end: scene-gen, dataset-gen, eval, render, bench.
#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "potnav/config.hpp"
#include "potnav/dataset.hpp"
#include "potnav/errors.hpp"
#include "potnav/manifest.hpp"
#include "potnav/map_io.hpp"
#include "potnav/predictor.hpp"
#include "potnav/render.hpp"
#include "potnav/report.hpp"
#include "potnav/scenegen.hpp"
#include "potnav/sim.hpp"

namespace fs = std::filesystem;
using namespace potnav;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

/// Bad invocation detected after CLI11 parsing.
class UsageError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Options shared by all subcommands. Explicit flags are applied on top of the
// --config file, so they win.
struct Common {
  std::string config_path;
  bool dump_config = false;
  std::optional<double> resolution;
  std::optional<std::uint64_t> seed;

  void attach(CLI::App* app, const char* seed_help) {
    app->add_option("--config", config_path, "JSON run config")->check(CLI::ExistingFile);
    app->add_flag("--dump-config", dump_config, "print the effective config and exit");
    app->add_option("--resolution", resolution, "map resolution in metres per cell");
    app->add_option("--seed", seed, seed_help);
  }

  RunConfig load() const {
    RunConfig c = config_path.empty() ? RunConfig{} : load_config(config_path, false);
    if (resolution) c.resolution_m = *resolution;
    return c;
  }
};

// Validates the merged config; true when the caller should stop after --dump-config.
bool finalize(RunConfig& c, const Common& common) {
  c.potentials.success_radius_m = c.episodes.success_radius_m;
  c.validate();
  if (common.dump_config) {
    std::cout << dump_config(c);
    return true;
  }
  return false;
}

std::vector<SceneEntry> scenes_from(const std::string& manifest, const RunConfig& c) {
  if (!manifest.empty()) return load_scenes(manifest);
  return generate_scenes(c, plan_scenes(c.seeds.scene, c.scenes.count));
}

struct SceneGenArgs {
  Common common;
  std::optional<int> count;
  std::string out;
};

int run_scene_gen(const SceneGenArgs& a) {
  RunConfig c = a.common.load();
  if (a.common.seed) c.seeds.scene = *a.common.seed;
  if (a.count) c.scenes.count = *a.count;
  if (finalize(c, a.common)) return kExitOk;
  fs::create_directories(a.out);
  const auto plan = plan_scenes(c.seeds.scene, c.scenes.count);
  for (const auto& e : plan) save_map(fs::path(a.out) / e.path, generate_scene(scene_params(c, e.seed)));
  write_file_atomic(fs::path(a.out) / "manifest.json", manifest_json(plan, c.resolution_m));
  std::cout << "wrote " << plan.size() << " scenes to " << a.out << "\n";
  return kExitOk;
}

struct DatasetArgs {
  Common common;
  std::string scenes;
  std::optional<int> count;
  std::optional<std::string> mask;
  std::optional<bool> augment;
  std::string out;
};

int run_dataset_gen(const DatasetArgs& a) {
  RunConfig c = a.common.load();
  if (a.common.seed) c.seeds.dataset = *a.common.seed;
  if (a.count) c.dataset.count = *a.count;
  if (a.augment) c.dataset.augment = *a.augment;
  if (a.mask) c.mask.strategy = *a.mask == "square" ? MaskStrategy::kSquare : MaskStrategy::kViewCone;
  if (finalize(c, a.common)) return kExitOk;
  const auto scenes = scenes_from(a.scenes, c);
  const auto tuples = generate_dataset(scenes, static_cast<std::size_t>(c.dataset.count), c.seeds.dataset,
                                       c.mask, potential_params(c), c.dataset.augment);
  save_dataset(a.out, tuples);
  std::cout << "wrote " << tuples.size() << " tuples to " << a.out << "\n";
  return kExitOk;
}

struct EvalArgs {
  Common common;
  std::string scenes;
  std::optional<int> scene_count;
  std::optional<int> episodes;
  std::optional<double> alpha;
  std::optional<int> budget;
  std::vector<std::string> policies;
  std::string predictor = "oracle";
  std::string external;
  std::string report;
};

int run_eval(const EvalArgs& a) {
  RunConfig c = a.common.load();
  if (a.common.seed) c.seeds.eval = *a.common.seed;
  if (a.scene_count) c.scenes.count = *a.scene_count;
  if (a.episodes) c.episodes.per_scene = *a.episodes;
  if (a.alpha) c.potentials.alpha = *a.alpha;
  if (a.budget) c.episodes.budget_steps = *a.budget;
  if (finalize(c, a.common)) return kExitOk;

  const auto predictor = parse_predictor_kind(a.predictor);
  if (!predictor) throw UsageError("unknown predictor: " + a.predictor);
  std::vector<PolicySpec> policies;
  for (const auto& name : a.policies.empty() ? std::vector<std::string>{"poni"} : a.policies) {
    const auto kind = parse_policy_kind(name);
    if (!kind) throw UsageError("unknown policy: " + name);
    PolicySpec p;
    p.kind = *kind;
    p.predictor = *predictor;
    p.external_command = a.external;
    policies.push_back(std::move(p));
  }
  const auto scenes = scenes_from(a.scenes, c);
  const auto report = evaluate(scenes, eval_config(c, std::move(policies)));
  const auto text = report_json(report, c);
  if (a.report.empty()) {
    std::cout << text;
    return kExitOk;
  }
  write_file_atomic(a.report, text);
  for (const auto& g : report.aggregate) {
    std::cout << g.policy << ": episodes=" << g.episodes << " success=" << g.success << " spl=" << g.spl
              << " softspl=" << g.softspl << " dts_m=" << g.dts_m << "\n";
  }
  return kExitOk;
}

struct RenderArgs {
  Common common;
  std::string map;
  std::string complete;
  std::string overlay = "none";
  std::string out;
  std::string dump_field;
  std::vector<int> view;
  int scale = 4;
};

int run_render(const RenderArgs& a) {
  RunConfig c = a.common.load();
  if (finalize(c, a.common)) return kExitOk;
  SemanticGrid grid = load_map(a.map);
  std::string complete_path = a.complete;
  if (!a.view.empty()) {
    // --map is the complete scene; render what one observation from the pose reveals
    if (!complete_path.empty()) throw UsageError("--view and --complete are exclusive");
    const Pose pose{{a.view[0], a.view[1]}, a.view[2]};
    if (!grid.complete() || !grid.in_bounds(pose.cell) || !grid.known_free(pose.cell)) {
      throw UsageError("--view needs a complete map and a free cell");
    }
    complete_path = a.map;
    grid = sense(grid, SemanticGrid(grid.width(), grid.height(), grid.resolution(), grid.categories()),
                 pose, c.sensors);
  }
  Image img = render_map(grid);
  std::optional<PotentialField> field;

  auto need_complete = [&]() {
    if (complete_path.empty()) throw UsageError("overlay " + a.overlay + " needs --complete or --view");
    SemanticGrid full = load_map(complete_path);
    require_same_shape(grid, full, "render");
    return full;
  };

  if (a.overlay == "none") {
  } else if (a.overlay == "pf:area") {
    field = area_potential(grid, need_complete(), potential_params(c));
  } else if (a.overlay.starts_with("pf:object:")) {
    const std::string cat = a.overlay.substr(10);
    const auto full = need_complete();
    const auto id = full.categories().find(cat);
    if (!id) throw UsageError("unknown category: " + cat);
    field = object_potential(grid, full, *id, potential_params(c));
  } else if (a.overlay.starts_with("trajectory:")) {
    const std::string arg = a.overlay.substr(11);
    const auto comma = arg.rfind(',');
    if (comma == std::string::npos || comma + 1 == arg.size()) {
      throw UsageError("trajectory overlay needs <report>,<episode>");
    }
    std::size_t index = 0;
    try {
      std::size_t used = 0;
      const long long v = std::stoll(arg.substr(comma + 1), &used);
      if (used != arg.size() - comma - 1 || v < 0) throw std::invalid_argument("episode");
      index = static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      throw UsageError("episode id must be a non-negative integer: " + arg.substr(comma + 1));
    }
    ReportEpisode ep;
    try {
      ep = load_report_episode(arg.substr(0, comma), index);
    } catch (const ArgumentError& e) {
      throw UsageError(e.what());
    }
    overlay_trajectory(img, ep.trajectory);
  } else {
    throw UsageError("unknown overlay: " + a.overlay);
  }

  if (field) {
    overlay_potential(img, *field);
    if (!a.dump_field.empty()) save_potential_field(a.dump_field, *field);
  } else if (!a.dump_field.empty()) {
    throw UsageError("--dump-field needs a pf overlay");
  }
  write_file_atomic(a.out, encode_ppm(upscale(img, a.scale)));
  return kExitOk;
}

struct BenchArgs {
  Common common;
  int repeat = 5;
  int episodes = 4;
};

int run_bench(const BenchArgs& a) {
  RunConfig c = a.common.load();
  if (a.common.seed) c.seeds.scene = *a.common.seed;
  if (finalize(c, a.common)) return kExitOk;
  using clock = std::chrono::steady_clock;
  auto ms_since = [](clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  };
  auto time_avg = [&](auto&& f) {
    const auto t0 = clock::now();
    for (int i = 0; i < a.repeat; ++i) f();
    return ms_since(t0) / a.repeat;
  };

  const auto plan = plan_scenes(c.seeds.scene, 1);
  SemanticGrid scene;
  const double t_scene = time_avg([&] { scene = generate_scene(scene_params(c, plan[0].seed)); });
  const auto goal = scene.categories().goal_categories().front();
  const double t_zone = time_avg([&] { (void)success_zone_distance(scene, goal, c.episodes.success_radius_m); });
  const auto tuple = make_training_tuple(scene, c.seeds.dataset, c.mask, potential_params(c));
  const OraclePredictor oracle(scene, potential_params(c));
  (void)oracle.zone_field(goal);
  const double t_predict = time_avg([&] { (void)oracle.predict(tuple.partial, goal); });

  RunConfig ec = c;
  ec.episodes.per_scene = a.episodes;
  PolicySpec poni;
  const std::vector<SceneEntry> one{{plan[0].id, scene}};
  const auto t0 = clock::now();
  const auto report = evaluate(one, eval_config(ec, {poni}));
  const double t_eval = ms_since(t0);
  long long steps = 0;
  for (const auto& e : report.episodes) steps += e.result.steps;

  std::cout << "scene " << scene.width() << "x" << scene.height() << " cells\n"
            << "generate_scene_ms " << t_scene << "\n"
            << "success_zone_distance_ms " << t_zone << "\n"
            << "oracle_predict_ms " << t_predict << "\n"
            << "episode_steps " << steps << "\n"
            << "ms_per_step " << (steps > 0 ? t_eval / static_cast<double>(steps) : 0.0) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Potential-function object-goal navigation toolkit"};
  app.require_subcommand(1);

  SceneGenArgs sg;
  auto* scene_gen = app.add_subcommand("scene-gen", "generate complete scene maps and a manifest");
  sg.common.attach(scene_gen, "base scene seed");
  scene_gen->add_option("--count", sg.count, "number of scenes");
  scene_gen->add_option("--out", sg.out, "output directory")->required();

  DatasetArgs ds;
  auto* dataset_gen = app.add_subcommand("dataset-gen", "generate a training-tuple dataset");
  ds.common.attach(dataset_gen, "dataset seed");
  dataset_gen->add_option("--scenes", ds.scenes, "scene manifest (default: generate from config)")
      ->check(CLI::ExistingFile);
  dataset_gen->add_option("--count", ds.count, "number of tuples");
  dataset_gen->add_option("--mask", ds.mask, "mask strategy")->check(CLI::IsMember({"square", "view_cone"}));
  dataset_gen->add_flag("--augment,!--no-augment", ds.augment, "random rotate/shift augmentation");
  dataset_gen->add_option("--out", ds.out, "dataset file")->required();

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "run navigation episodes and write a JSON report");
  ev.common.attach(eval, "evaluation seed");
  eval->add_option("--scenes", ev.scenes, "scene manifest (default: generate from config)")
      ->check(CLI::ExistingFile);
  eval->add_option("--scene-count", ev.scene_count, "scenes to generate when no manifest is given");
  eval->add_option("--episodes", ev.episodes, "episodes per scene");
  eval->add_option("--alpha", ev.alpha, "area weight of the combined potential");
  eval->add_option("--budget", ev.budget, "step budget per episode");
  eval->add_option("--policy", ev.policies, "poni | fbe | area_only | object_only (repeatable)");
  eval->add_option("--predictor", ev.predictor, "oracle | frontier-area-heuristic | uniform-frontier");
  eval->add_option("--external-predictor", ev.external, "command for the file-exchange predictor");
  eval->add_option("--report", ev.report, "report path (default: stdout)");

  RenderArgs rd;
  auto* render = app.add_subcommand("render", "render a map with an optional overlay to a PPM image");
  rd.common.attach(render, "unused; accepted for uniformity");
  render->add_option("--map", rd.map, "map file")->required()->check(CLI::ExistingFile);
  render->add_option("--complete", rd.complete, "complete map, needed by pf overlays")->check(CLI::ExistingFile);
  render->add_option("--overlay", rd.overlay,
                     "none | pf:area | pf:object:<category> | trajectory:<report>,<episode>");
  render->add_option("--view", rd.view, "row col heading: render the partial map seen from this pose")
      ->expected(3)
      ->delimiter(',');
  render->add_option("--out", rd.out, "output image (.ppm)")->required();
  render->add_option("--scale", rd.scale, "pixels per cell")->check(CLI::Range(1, 64));
  render->add_option("--dump-field", rd.dump_field, "also write the overlaid potential field");

  BenchArgs bn;
  auto* bench = app.add_subcommand("bench", "time the main operations on one generated scene");
  bn.common.attach(bench, "scene seed");
  bench->add_option("--repeat", bn.repeat, "repetitions per timed operation")->check(CLI::Range(1, 1000));
  bench->add_option("--episodes", bn.episodes, "poni episodes to time")->check(CLI::Range(1, 1000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*scene_gen) return run_scene_gen(sg);
    if (*dataset_gen) return run_dataset_gen(ds);
    if (*eval) return run_eval(ev);
    if (*render) return run_render(rd);
    if (*bench) return run_bench(bn);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
