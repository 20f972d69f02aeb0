#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "potnav/config.hpp"
#include "potnav/dataset.hpp"

namespace potnav {

inline constexpr int kManifestFormatVersion = 1;

struct ManifestEntry {
  std::string id;
  std::uint64_t seed = 0;
  std::string path;  ///< relative to the manifest's directory
  bool operator==(const ManifestEntry&) const = default;
};

/// Scene k gets id "scene_kkk" and seed derive_seed(base_seed, k).
std::vector<ManifestEntry> plan_scenes(std::uint64_t base_seed, int count);
/// Generates the scenes of `plan` with the config's scene settings.
std::vector<SceneEntry> generate_scenes(const RunConfig& config, const std::vector<ManifestEntry>& plan);

std::string manifest_json(const std::vector<ManifestEntry>& entries, double resolution_m);
/// Parses a manifest; throws ParseError when malformed.
std::vector<ManifestEntry> parse_manifest(std::string_view json_text);
/// Reads the manifest and every map it lists.
std::vector<SceneEntry> load_scenes(const std::filesystem::path& manifest);

}  // namespace potnav
