#include "potnav/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "potnav/errors.hpp"
#include "potnav/map_io.hpp"
#include "potnav/rng.hpp"
#include "potnav/scenegen.hpp"

namespace potnav {

std::vector<ManifestEntry> plan_scenes(std::uint64_t base_seed, int count) {
  if (count < 0) throw ArgumentError("scene count must be >= 0");
  std::vector<ManifestEntry> out;
  for (int k = 0; k < count; ++k) {
    char id[32];
    std::snprintf(id, sizeof id, "scene_%03d", k);
    out.push_back({id, derive_seed(base_seed, static_cast<std::uint64_t>(k)), std::string(id) + ".map"});
  }
  return out;
}

std::vector<SceneEntry> generate_scenes(const RunConfig& config, const std::vector<ManifestEntry>& plan) {
  std::vector<SceneEntry> out;
  out.reserve(plan.size());
  for (const auto& e : plan) out.push_back({e.id, generate_scene(scene_params(config, e.seed))});
  return out;
}

std::string manifest_json(const std::vector<ManifestEntry>& entries, double resolution_m) {
  nlohmann::ordered_json j;
  j["format"] = "potnav-scene-manifest";
  j["version"] = kManifestFormatVersion;
  j["resolution_m"] = resolution_m;
  auto& arr = j["scenes"] = nlohmann::ordered_json::array();
  for (const auto& e : entries) arr.push_back({{"id", e.id}, {"seed", e.seed}, {"path", e.path}});
  return j.dump(2) + "\n";
}

std::vector<ManifestEntry> parse_manifest(std::string_view json_text) {
  try {
    const auto j = nlohmann::json::parse(json_text);
    if (j.value("format", "") != "potnav-scene-manifest") throw ParseError("not a scene manifest");
    if (j.value("version", 0) != kManifestFormatVersion) throw ParseError("unsupported manifest version");
    std::vector<ManifestEntry> out;
    for (const auto& e : j.at("scenes")) {
      out.push_back({e.at("id").get<std::string>(), e.at("seed").get<std::uint64_t>(),
                     e.at("path").get<std::string>()});
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed manifest: ") + e.what());
  }
}

std::vector<SceneEntry> load_scenes(const std::filesystem::path& manifest) {
  std::ifstream in(manifest, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open manifest " + manifest.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  std::vector<SceneEntry> out;
  for (const auto& e : parse_manifest(ss.str())) {
    out.push_back({e.id, load_map(manifest.parent_path() / e.path)});
  }
  return out;
}

}  // namespace potnav
