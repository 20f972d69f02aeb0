#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "potnav/config.hpp"
#include "potnav/sim.hpp"

namespace potnav {

inline constexpr int kReportFormatVersion = 1;

/// JSON evaluation report: effective config, one aggregate row per policy and
/// one row per (episode, policy) with its trajectory. No timestamps or host
/// data, so equal inputs give byte-identical text. Infinite distances are
/// written as null. Schema in docs/formats.md.
std::string report_json(const EvalReport& report, const RunConfig& config);

struct ReportEpisode {
  std::size_t index = 0;
  std::string scene_id;
  std::string policy;
  std::string goal;
  std::vector<Pose> trajectory;
};

/// Row `index` of the report's episode array. Throws ParseError on a
/// malformed report and ArgumentError when the index does not exist.
ReportEpisode read_report_episode(std::string_view json_text, std::size_t index);
ReportEpisode load_report_episode(const std::filesystem::path& path, std::size_t index);

}  // namespace potnav
