#pragma once

#include <optional>
#include <span>
#include <vector>

#include "potnav/geodesics.hpp"
#include "potnav/grid_map.hpp"

namespace potnav {

/// Per-cell scalar field in [0, 1].
class PotentialField {
public:
  PotentialField() = default;
  PotentialField(int width, int height) : width_(width), height_(height),
      values_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0.0) {}
  PotentialField(int width, int height, std::vector<double> values);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }
  double at(GridCell c) const;
  void set(GridCell c, double v);
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  bool same_shape(const PotentialField& o) const noexcept {
    return width_ == o.width_ && height_ == o.height_;
  }
  bool in_unit_range() const noexcept;

  bool operator==(const PotentialField&) const = default;

private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

enum class AreaNorm {
  kTotalFreeSpace,  ///< divide by the complete map's free area
  kFixedConstant,   ///< divide by area_norm_constant_m2 (large maps)
};

struct PotentialParams {
  double alpha = 0.5;
  double d_max = 10.0;            ///< meters at which the object potential reaches 0
  double success_radius_m = 1.0;  ///< radius of the goal success zone
  /// Weights of the action-cost combination; both set or both unset.
  std::optional<double> beta;
  std::optional<double> gamma;
  AreaNorm area_norm = AreaNorm::kTotalFreeSpace;
  double area_norm_constant_m2 = 0.0;

  /// Throws ArgumentError naming the first offending field.
  void validate() const;
  bool operator==(const PotentialParams&) const = default;
};

/// Frontier cells carry the hidden free area they gate, as a fraction of the
/// normaliser and clamped to 1; all other cells are 0.
PotentialField area_potential(const SemanticGrid& partial, const SemanticGrid& complete,
                              const PotentialParams& params);
/// Same, reusing frontier_mask(partial).
PotentialField area_potential(const SemanticGrid& partial, const SemanticGrid& complete,
                              const PotentialParams& params, std::span<const std::uint8_t> frontier);

/// Frontier cells carry max(1 - d/d_max, 0), d being the geodesic distance on
/// the complete map to the category's success zone; 0 elsewhere or when
/// unreachable.
PotentialField object_potential(const SemanticGrid& partial, const SemanticGrid& complete,
                                CategoryId category, const PotentialParams& params);
/// Same, with a precomputed success_zone_distance() field.
PotentialField object_potential(const SemanticGrid& partial, const DistanceField& zone_distance,
                                const PotentialParams& params);
PotentialField object_potential(const SemanticGrid& partial, const DistanceField& zone_distance,
                                const PotentialParams& params, std::span<const std::uint8_t> frontier);

/// alpha * area + (1 - alpha) * object.
PotentialField combine(const PotentialField& area, const PotentialField& object,
                       const PotentialParams& params);

/// max(1 - d/horizon, 0) over explored free cells, d the dijkstra-octile
/// distance from the agent on known free space; 0 elsewhere.
PotentialField distance_potential(const SemanticGrid& partial, GridCell agent, double horizon_m);

/// alpha * area + beta * object + gamma * distance; weights must sum to 1.
PotentialField combine_with_action_cost(const PotentialField& area, const PotentialField& object,
                                        const PotentialField& distance,
                                        const PotentialParams& params);

/// Zeroes explored non-frontier cells, then returns the maximum cell. Ties go
/// to the smallest dijkstra-octile distance from `agent` over the partial map
/// (unexplored traversable), then to the smallest (row, col). nullopt when the
/// filtered field has no positive value; callers fall back to a frontier.
std::optional<GridCell> sample_long_term_goal(const PotentialField& potential,
                                              const SemanticGrid& partial, GridCell agent);
/// Same, reusing frontier_mask(partial).
std::optional<GridCell> sample_long_term_goal(const PotentialField& potential,
                                              const SemanticGrid& partial, GridCell agent,
                                              std::span<const std::uint8_t> frontier);

struct PfLoss {
  double area = 0.0;    ///< mean squared area error over frontier cells
  double object = 0.0;  ///< mean squared object error over frontier cells and categories
};

PfLoss pf_loss(const PotentialField& predicted_area,
               std::span<const PotentialField> predicted_objects,
               const PotentialField& target_area, std::span<const PotentialField> target_objects,
               std::span<const GridCell> frontier_cells);

/// All frontier cells of `grid`, row-major.
std::vector<GridCell> frontier_cells(const SemanticGrid& grid);

}  // namespace potnav
