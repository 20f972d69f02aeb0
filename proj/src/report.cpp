#include "potnav/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "potnav/errors.hpp"

namespace potnav {
namespace {

using ojson = nlohmann::ordered_json;

ojson finite_or_null(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

ojson pose_json(const Pose& p) { return ojson::array({p.cell.row, p.cell.col, p.heading_deg}); }

}  // namespace

std::string report_json(const EvalReport& report, const RunConfig& config) {
  ojson j;
  j["format"] = "potnav-eval-report";
  j["version"] = kReportFormatVersion;
  j["config"] = ojson::parse(dump_config(config));
  auto& agg = j["aggregate"] = ojson::array();
  for (const auto& a : report.aggregate) {
    agg.push_back({{"policy", a.policy},
                   {"episodes", a.episodes},
                   {"success", a.success},
                   {"spl", a.spl},
                   {"softspl", a.softspl},
                   {"dts_m", finite_or_null(a.dts_m)}});
  }
  auto& eps = j["episodes"] = ojson::array();
  for (std::size_t i = 0; i < report.episodes.size(); ++i) {
    const auto& e = report.episodes[i];
    const auto& r = e.result;
    ojson traj = ojson::array();
    for (const auto& p : r.trajectory) traj.push_back(pose_json(p));
    eps.push_back({{"index", i},
                   {"scene", e.scene_id},
                   {"episode", e.episode},
                   {"policy", e.policy},
                   {"goal", e.goal},
                   {"start", pose_json(e.start)},
                   {"success", r.success},
                   {"spl", r.spl},
                   {"softspl", r.softspl},
                   {"dts_m", finite_or_null(r.dts_m)},
                   {"agent_path_m", r.agent_path_m},
                   {"oracle_path_m", finite_or_null(r.oracle_path_m)},
                   {"steps", r.steps},
                   {"stop_reason", stop_reason_name(r.stop_reason)},
                   {"collisions", r.collisions},
                   {"substitutions", r.substitutions},
                   {"fallbacks", r.fallbacks},
                   {"trajectory", std::move(traj)}});
  }
  return j.dump(1) + "\n";
}

ReportEpisode read_report_episode(std::string_view json_text, std::size_t index) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("report is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("format", "") != "potnav-eval-report") {
    throw ParseError("not an evaluation report");
  }
  if (j.value("version", 0) != kReportFormatVersion) throw ParseError("unsupported report version");
  const auto it = j.find("episodes");
  if (it == j.end() || !it->is_array()) throw ParseError("report has no episode array");
  if (index >= it->size()) {
    throw ArgumentError("episode " + std::to_string(index) + " not in report (" +
                        std::to_string(it->size()) + " episodes)");
  }
  const auto& e = (*it)[index];
  try {
    ReportEpisode out;
    out.index = index;
    out.scene_id = e.at("scene").get<std::string>();
    out.policy = e.at("policy").get<std::string>();
    out.goal = e.at("goal").get<std::string>();
    for (const auto& p : e.at("trajectory")) {
      if (!p.is_array() || p.size() != 3) throw ParseError("trajectory entries must be [row, col, heading]");
      out.trajectory.push_back({{p[0].get<int>(), p[1].get<int>()}, p[2].get<int>()});
    }
    return out;
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("malformed episode row: ") + ex.what(), static_cast<long long>(index));
  }
}

ReportEpisode load_report_episode(const std::filesystem::path& path, std::size_t index) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open report " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return read_report_episode(ss.str(), index);
}

}  // namespace potnav
