#include "potnav/predictor.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <unistd.h>

#include "potnav/errors.hpp"
#include "potnav/map_io.hpp"

namespace potnav {

namespace {

constexpr std::string_view kKindNames[] = {"oracle", "frontier-area-heuristic", "uniform-frontier"};

// Removes a scratch directory when leaving scope.
class ScratchDir {
public:
  ScratchDir() {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("potnav-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

private:
  std::filesystem::path path_;
};

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

}  // namespace

std::string_view predictor_kind_name(PredictorKind kind) {
  return kKindNames[static_cast<std::size_t>(kind)];
}

std::optional<PredictorKind> parse_predictor_kind(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kKindNames); ++i) {
    if (kKindNames[i] == name) return static_cast<PredictorKind>(i);
  }
  return std::nullopt;
}

OraclePredictor::OraclePredictor(SemanticGrid complete, PotentialParams params)
    : complete_(std::move(complete)), params_(params) {
  if (!complete_.complete()) throw ArgumentError("oracle predictor: map is not complete");
  params_.validate();
  zones_.resize(complete_.categories().size());
}

const DistanceField& OraclePredictor::zone_field(CategoryId category) const {
  if (!complete_.categories().contains(category)) {
    throw ArgumentError("oracle predictor: unknown category id " + std::to_string(category));
  }
  std::lock_guard lock(mutex_);
  auto& slot = zones_[static_cast<std::size_t>(category)];
  if (!slot) {
    slot = std::make_unique<DistanceField>(
        success_zone_distance(complete_, category, params_.success_radius_m));
  }
  return *slot;
}

Prediction OraclePredictor::predict(const SemanticGrid& partial, CategoryId category) const {
  require_same_shape(partial, complete_, "oracle predictor");
  const auto frontier = frontier_mask(partial);
  return {area_potential(partial, complete_, params_, frontier),
          object_potential(partial, zone_field(category), params_, frontier)};
}

FrontierHeuristicPredictor::FrontierHeuristicPredictor(PredictorKind kind) : kind_(kind) {
  if (kind == PredictorKind::kOracle) throw ArgumentError("heuristic predictor: oracle is not a heuristic");
}

Prediction FrontierHeuristicPredictor::predict(const SemanticGrid& partial, CategoryId category) const {
  if (!partial.categories().contains(category)) {
    throw ArgumentError("predictor: unknown category id " + std::to_string(category));
  }
  Prediction p{PotentialField(partial.width(), partial.height()),
               PotentialField(partial.width(), partial.height())};
  const auto frontiers = extract_frontiers(partial);
  std::size_t largest = 0;
  for (const auto& f : frontiers) largest = std::max(largest, f.cells.size());
  for (const auto& f : frontiers) {
    const double v = kind_ == PredictorKind::kUniformFrontier
                         ? 1.0
                         : static_cast<double>(f.cells.size()) / static_cast<double>(largest);
    for (const auto& c : f.cells) p.area.set(c, v);
  }
  return p;
}

ExternalPredictor::ExternalPredictor(std::string command) : command_(std::move(command)) {
  if (command_.empty()) throw ArgumentError("external predictor: empty command");
}

Prediction ExternalPredictor::predict(const SemanticGrid& partial, CategoryId category) const {
  const std::string& name = partial.categories().name(category);
  ScratchDir dir;
  const auto map_path = dir.path() / "partial.map";
  const auto area_path = dir.path() / "area.pf";
  const auto object_path = dir.path() / "object.pf";
  save_map(map_path, partial);
  const std::string cmd = command_ + " " + shell_quote(map_path.string()) + " " + shell_quote(name) +
                          " " + shell_quote(area_path.string()) + " " +
                          shell_quote(object_path.string());
  const int status = std::system(cmd.c_str());
  if (status != 0) {
    throw std::runtime_error("external predictor failed with status " + std::to_string(status) +
                             ": " + command_);
  }
  Prediction p{load_potential_field(area_path), load_potential_field(object_path)};
  if (p.area.width() != partial.width() || p.area.height() != partial.height() ||
      !p.area.same_shape(p.object)) {
    throw ShapeError("external predictor: output shape differs from the map");
  }
  return p;
}

std::unique_ptr<Predictor> make_predictor(PredictorKind kind, const SemanticGrid* complete,
                                          const PotentialParams& params) {
  if (kind == PredictorKind::kOracle) {
    if (!complete) throw ArgumentError("oracle predictor requires the complete map");
    return std::make_unique<OraclePredictor>(*complete, params);
  }
  return std::make_unique<FrontierHeuristicPredictor>(kind);
}

Prediction predict(PredictorKind kind, const SemanticGrid& partial, const SemanticGrid* complete,
                   CategoryId category, const PotentialParams& params) {
  return make_predictor(kind, complete, params)->predict(partial, category);
}

namespace {

struct LossSum {
  double area = 0.0;
  double object = 0.0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;

  void add(const Predictor& p, const TrainingTuple& t) {
    if (t.frontier_cells.empty()) {
      ++skipped;
      return;
    }
    std::vector<PotentialField> predicted;
    PotentialField predicted_area;
    for (std::size_t cat = 0; cat < t.target_objects.size(); ++cat) {
      auto pr = p.predict(t.partial, static_cast<CategoryId>(cat));
      if (cat == 0) predicted_area = std::move(pr.area);
      predicted.push_back(std::move(pr.object));
    }
    if (t.target_objects.empty()) predicted_area = p.predict(t.partial, 0).area;
    const auto loss = pf_loss(predicted_area, predicted, t.target_area, t.target_objects, t.frontier_cells);
    area += loss.area;
    object += loss.object;
    ++evaluated;
  }

  PredictorScore score() const {
    PredictorScore s;
    s.evaluated = evaluated;
    s.skipped = skipped;
    if (evaluated) {
      s.mean_area_loss = area / static_cast<double>(evaluated);
      s.mean_object_loss = object / static_cast<double>(evaluated);
    }
    return s;
  }
};

}  // namespace

PredictorScore evaluate_predictor(const Predictor& predictor, std::span<const TrainingTuple> dataset) {
  if (dataset.empty()) throw ArgumentError("evaluate_predictor: empty dataset");
  LossSum sum;
  for (const auto& t : dataset) sum.add(predictor, t);
  return sum.score();
}

PredictorScore evaluate_predictor(PredictorKind kind, std::span<const TrainingTuple> dataset,
                                  const PotentialParams& params,
                                  std::span<const SemanticGrid> completes) {
  if (dataset.empty()) throw ArgumentError("evaluate_predictor: empty dataset");
  if (!completes.empty() && completes.size() != dataset.size()) {
    throw ArgumentError("evaluate_predictor: one complete map per tuple is required");
  }
  if (kind == PredictorKind::kOracle && completes.empty()) {
    throw ArgumentError("evaluate_predictor: the oracle needs complete maps");
  }
  LossSum sum;
  if (kind != PredictorKind::kOracle) {
    const FrontierHeuristicPredictor p(kind);
    for (const auto& t : dataset) sum.add(p, t);
    return sum.score();
  }
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const OraclePredictor p(completes[i], params);
    sum.add(p, dataset[i]);
  }
  return sum.score();
}

}  // namespace potnav
