// Runs the potnav executable as a subprocess; POTNAV_CLI is its path.
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "potnav/config.hpp"
#include "potnav/manifest.hpp"
#include "potnav/map_io.hpp"
#include "potnav/render.hpp"

namespace fs = std::filesystem;
using namespace potnav;

namespace {

struct Run {
  int code = -1;
  std::string err;
  std::string out;
};

class TempDir {
public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("potnav_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

private:
  static inline int counter_ = 0;
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run run(const TempDir& dir, const std::string& args) {
  const auto out = dir.path() / "stdout.txt";
  const auto err = dir.path() / "stderr.txt";
  const std::string cmd = "cd '" + dir.path().string() + "' && '" + POTNAV_CLI + "' " + args + " >'" +
                          out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

// Small scenes and short episodes keep each eval call quick.
const std::string kSmall =
    R"({"scenes": {"count": 1, "width_m": 6, "height_m": 5, "min_rooms": 2, "max_rooms": 3},
        "episodes": {"per_scene": 2, "budget_steps": 80, "min_start_m": 1.0}})";

}  // namespace

TEST_CASE("cli: scene-gen writes the requested maps and a manifest") {
  TempDir d;
  const auto r = run(d, "scene-gen --seed 7 --count 3 --out scenes");
  REQUIRE(r.code == 0);
  const auto entries = load_scenes(d.path() / "scenes" / "manifest.json");
  REQUIRE(entries.size() == 3);
  for (const auto& e : entries) CHECK(e.grid.complete());
  int maps = 0;
  for (const auto& f : fs::directory_iterator(d.path() / "scenes")) maps += f.path().extension() == ".map";
  CHECK(maps == 3);
  // same seed, same bytes
  REQUIRE(run(d, "scene-gen --seed 7 --count 3 --out again").code == 0);
  CHECK(slurp(d.path() / "scenes" / "scene_001.map") == slurp(d.path() / "again" / "scene_001.map"));
}

TEST_CASE("cli: eval with a fixed seed is byte-identical across runs") {
  TempDir d;
  write(d.path() / "small.json", kSmall);
  const std::string args = "eval --config small.json --policy poni --predictor oracle --seed 1 --report ";
  REQUIRE(run(d, args + "a.json").code == 0);
  REQUIRE(run(d, args + "b.json").code == 0);
  const auto a = slurp(d.path() / "a.json");
  CHECK_FALSE(a.empty());
  CHECK(a == slurp(d.path() / "b.json"));
  // without --report the same text goes to stdout
  CHECK(run(d, "eval --config small.json --policy poni --predictor oracle --seed 1").out == a);
  REQUIRE(run(d, "eval --config small.json --policy poni --seed 2 --report c.json").code == 0);
  CHECK(slurp(d.path() / "c.json") != a);
}

TEST_CASE("cli: invalid config values and unknown keys exit 2 naming the field") {
  TempDir d;
  write(d.path() / "bad.json", R"({"potentials": {"alpha": 1.5}})");
  auto r = run(d, "eval --config bad.json");
  CHECK(r.code == 2);
  CHECK(r.err.find("alpha") != std::string::npos);

  write(d.path() / "typo.json", R"({"episodes": {"budget": 10}})");
  r = run(d, "eval --config typo.json");
  CHECK(r.code == 2);
  CHECK(r.err.find("episodes.budget") != std::string::npos);

  r = run(d, "eval --alpha -0.1");
  CHECK(r.code == 2);
  CHECK(r.err.find("alpha") != std::string::npos);
}

TEST_CASE("cli: usage errors exit 2") {
  TempDir d;
  CHECK(run(d, "").code == 2);
  CHECK(run(d, "frobnicate").code == 2);
  CHECK(run(d, "eval --no-such-flag").code == 2);
  CHECK(run(d, "scene-gen --count 2").code == 2);
  CHECK(run(d, "eval --policy teleport").code == 2);
  CHECK(run(d, "eval --config missing.json").code == 2);
  CHECK(run(d, "--help").code == 0);
}

TEST_CASE("cli: flags override the config file and --dump-config re-parses") {
  TempDir d;
  write(d.path() / "c.json", R"({"potentials": {"alpha": 1.5}, "seeds": {"eval": 4}, "episodes": {"budget_steps": 50}})");
  const auto r = run(d, "eval --config c.json --alpha 0.25 --budget 70 --dump-config");
  REQUIRE(r.code == 0);
  const RunConfig c = parse_config(r.out);
  CHECK(c.potentials.alpha == 0.25);
  CHECK(c.episodes.budget_steps == 70);
  CHECK(c.seeds.eval == 4);
  CHECK(dump_config(c) == r.out);
}

TEST_CASE("cli: runtime failures exit 1") {
  TempDir d;
  write(d.path() / "broken.map", "SEMGRID 1\nwidth x\n");
  const auto r = run(d, "render --map broken.map --out x.ppm");
  CHECK(r.code == 1);
  CHECK_FALSE(r.err.empty());
  CHECK_FALSE(fs::exists(d.path() / "x.ppm"));
}

TEST_CASE("cli: render overlays") {
  TempDir d;
  write(d.path() / "small.json", kSmall);
  REQUIRE(run(d, "scene-gen --config small.json --seed 3 --count 1 --out s").code == 0);
  REQUIRE(run(d, "eval --config small.json --scenes s/manifest.json --seed 3 --report r.json").code == 0);

  REQUIRE(run(d, "render --map s/scene_000.map --scale 1 --out none.ppm").code == 0);
  const auto scene = load_map(d.path() / "s" / "scene_000.map");
  CHECK(slurp(d.path() / "none.ppm") == encode_ppm(render_map(scene)));

  REQUIRE(run(d, "render --map s/scene_000.map --scale 2 --overlay trajectory:r.json,1 --out t.ppm").code == 0);
  CHECK(slurp(d.path() / "t.ppm").size() == encode_ppm(upscale(render_map(scene), 2)).size());

  auto r = run(d, "render --map s/scene_000.map --overlay trajectory:r.json --out t2.ppm");
  CHECK(r.code == 2);
  r = run(d, "render --map s/scene_000.map --overlay trajectory:r.json,99 --out t2.ppm");
  CHECK(r.code == 2);
  CHECK(r.err.find("99") != std::string::npos);
  CHECK(run(d, "render --map s/scene_000.map --overlay pf:area --out p.ppm").code == 2);
  CHECK(run(d, "render --map s/scene_000.map --overlay sparkles --out p.ppm").code == 2);

  // a complete map has no frontiers, so its area field is all zero
  REQUIRE(run(d, "render --map s/scene_000.map --complete s/scene_000.map --overlay pf:area --scale 1 "
                 "--out zero.ppm --dump-field zero.pf")
              .code == 0);
  CHECK(slurp(d.path() / "zero.ppm") == slurp(d.path() / "none.ppm"));
  const auto zero = load_potential_field(d.path() / "zero.pf");
  for (double v : zero.values()) CHECK(v == 0.0);
}
