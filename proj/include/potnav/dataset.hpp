#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "potnav/geodesics.hpp"
#include "potnav/grid_map.hpp"
#include "potnav/potentials.hpp"

namespace potnav {

inline constexpr std::uint32_t kDatasetFormatVersion = 1;

enum class MaskStrategy { kSquare, kViewCone };

struct MaskParams {
  MaskStrategy strategy = MaskStrategy::kSquare;
  double square_side_m = 3.0;
  double cone_radius_m = 3.0;
  double cone_fov_deg = 90.0;
  /// The cone at path cell i faces from cell max(0, i - w) to cell i.
  int heading_window = 5;

  void validate() const;
  bool operator==(const MaskParams&) const = default;
};

/// Per-cell explored indicator, row-major.
using ExplorationMask = std::vector<std::uint8_t>;

/// Rotation by quarter_turns * 90 degrees counter-clockwise about the map
/// centre, then a shift by (drow, dcol) cells.
struct Transform {
  int quarter_turns = 0;
  int drow = 0;
  int dcol = 0;
  bool operator==(const Transform&) const = default;
};

/// Applies `t` and crops/pads back to the input dimensions; padding is
/// explored obstacle. Throws ArgumentError if a free cell would leave the map.
SemanticGrid augment_with(const SemanticGrid& complete, const Transform& t);

/// Seeded transform that keeps every free cell at least one cell inside the
/// map. Rotations whose free-space extent does not fit are skipped.
Transform sample_transform(const SemanticGrid& complete, std::uint64_t seed);

SemanticGrid augment(const SemanticGrid& complete, std::uint64_t seed);

/// Square mode stamps an odd-sided square (side = 2*floor(round(S/res)/2)+1
/// cells) on every path cell. View-cone mode casts a wall-occluded sector at
/// every path cell, facing along the incoming path direction.
///
/// Throws ArgumentError for an empty path or a path cell that is not free.
ExplorationMask exploration_mask(const SemanticGrid& complete, const PathPlan& path,
                                 const MaskParams& params);

struct Provenance {
  std::string scene_id;
  std::uint64_t seed = 0;
  Transform augmentation;
  bool operator==(const Provenance&) const = default;
};

struct TrainingTuple {
  SemanticGrid partial;
  PotentialField target_area;
  std::vector<PotentialField> target_objects;  ///< one per category id
  std::vector<GridCell> frontier_cells;        ///< row-major
  Provenance provenance;
  bool operator==(const TrainingTuple&) const = default;
};

/// Samples two distinct free cells, masks the shortest path between them,
/// reveals the mask into a fresh partial map and computes the analytical
/// targets for every category. `zone_fields`, when given, holds
/// success_zone_distance() per category for `complete`.
///
/// Throws GenerationError if no connected pair is found within a bounded
/// number of draws.
TrainingTuple make_training_tuple(const SemanticGrid& complete, std::uint64_t seed,
                                  const MaskParams& mask_params, const PotentialParams& pf_params,
                                  std::span<const DistanceField> zone_fields = {});

struct SceneEntry {
  std::string id;
  SemanticGrid grid;
};

/// Tuple k depends only on (seed, k) and the scene list.
std::vector<TrainingTuple> generate_dataset(std::span<const SceneEntry> scenes, std::size_t count,
                                            std::uint64_t seed, const MaskParams& mask_params,
                                            const PotentialParams& pf_params, bool augment);

/// Binary container, see docs/formats.md. read_dataset(write_dataset(d)) == d.
void write_dataset(std::ostream& out, std::span<const TrainingTuple> tuples);
std::vector<TrainingTuple> read_dataset(std::istream& in);
void save_dataset(const std::filesystem::path& path, std::span<const TrainingTuple> tuples);
std::vector<TrainingTuple> load_dataset(const std::filesystem::path& path);

}  // namespace potnav
