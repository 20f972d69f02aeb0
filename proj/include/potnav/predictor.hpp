#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "potnav/dataset.hpp"
#include "potnav/geodesics.hpp"
#include "potnav/grid_map.hpp"
#include "potnav/potentials.hpp"

namespace potnav {

enum class PredictorKind { kOracle, kFrontierAreaHeuristic, kUniformFrontier };

/// "oracle", "frontier-area-heuristic", "uniform-frontier".
std::string_view predictor_kind_name(PredictorKind kind);
std::optional<PredictorKind> parse_predictor_kind(std::string_view name);

struct Prediction {
  PotentialField area;
  PotentialField object;
};

/// Produces (U_a, U_o) for one goal category from a partial map.
/// Implementations must be callable concurrently.
class Predictor {
public:
  virtual ~Predictor() = default;
  virtual Prediction predict(const SemanticGrid& partial, CategoryId category) const = 0;
};

/// Analytical potentials on the complete map. Success-zone fields are cached
/// per category.
class OraclePredictor : public Predictor {
public:
  OraclePredictor(SemanticGrid complete, PotentialParams params);
  Prediction predict(const SemanticGrid& partial, CategoryId category) const override;
  const DistanceField& zone_field(CategoryId category) const;

private:
  SemanticGrid complete_;
  PotentialParams params_;
  mutable std::mutex mutex_;
  mutable std::vector<std::unique_ptr<DistanceField>> zones_;
};

/// Partial-map-only baselines. frontier-area-heuristic scores each frontier
/// by its cell count relative to the largest; uniform-frontier scores every
/// frontier cell 1. Both predict U_o = 0.
class FrontierHeuristicPredictor : public Predictor {
public:
  explicit FrontierHeuristicPredictor(PredictorKind kind);
  Prediction predict(const SemanticGrid& partial, CategoryId category) const override;

private:
  PredictorKind kind_;
};

/// Third-party predictor behind a file exchange. For each call it writes the
/// partial map to a scratch directory and runs
///   <command> <partial-map> <category-name> <area-out> <object-out>
/// expecting exit status 0 and two potential-field files.
class ExternalPredictor : public Predictor {
public:
  explicit ExternalPredictor(std::string command);
  Prediction predict(const SemanticGrid& partial, CategoryId category) const override;

private:
  std::string command_;
};

/// Throws ArgumentError for the oracle kind without a complete map.
std::unique_ptr<Predictor> make_predictor(PredictorKind kind, const SemanticGrid* complete,
                                          const PotentialParams& params);

/// One-shot convenience over make_predictor().
Prediction predict(PredictorKind kind, const SemanticGrid& partial, const SemanticGrid* complete,
                   CategoryId category, const PotentialParams& params);

struct PredictorScore {
  double mean_area_loss = 0.0;
  double mean_object_loss = 0.0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;  ///< tuples without frontier cells
};

/// Mean pf_loss over the dataset, predicting every category's object field.
/// `completes` is either empty or holds the complete map of each tuple (the
/// oracle needs it).
PredictorScore evaluate_predictor(PredictorKind kind, std::span<const TrainingTuple> dataset,
                                  const PotentialParams& params,
                                  std::span<const SemanticGrid> completes = {});
/// Same, for an arbitrary predictor.
PredictorScore evaluate_predictor(const Predictor& predictor, std::span<const TrainingTuple> dataset);

}  // namespace potnav
