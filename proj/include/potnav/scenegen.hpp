#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "potnav/grid_map.hpp"

namespace potnav {

enum class RoomType { kBedroom, kBathroom, kKitchen, kLivingRoom, kDiningRoom, kOffice };
inline constexpr int kRoomTypeCount = 6;

std::string_view room_type_name(RoomType t);
std::optional<RoomType> parse_room_type(std::string_view name);

struct PlacementPrior {
  RoomType room = RoomType::kLivingRoom;
  double weight = 1.0;
  bool operator==(const PlacementPrior&) const = default;
};

struct SceneParams {
  std::uint64_t seed = 0;
  double width_m = 12.0;
  double height_m = 12.0;
  double resolution_m = 0.05;
  int min_rooms = 4;
  int max_rooms = 8;
  double door_width_m = 0.9;
  double min_room_side_m = 2.0;
  double wall_adjacent_prob = 0.7;
  CategoryTable categories;
  /// Indexed by category id; an empty list places the category in any room.
  std::vector<std::vector<PlacementPrior>> placement_priors;

  /// Throws ArgumentError on invalid fields.
  void validate() const;
};

/// chair, couch, potted_plant, bed, toilet, tv as goals; table, sink,
/// refrigerator, bathtub as distractors.
CategoryTable default_category_table();
/// Room-type priors for default_category_table().
std::vector<std::vector<PlacementPrior>> default_placement_priors();
SceneParams default_scene_params(std::uint64_t seed);

/// Complete floor plan: outer walls, binary-partition rooms with one door per
/// partition wall, single connected free space, and small object blobs placed
/// according to the room-type priors. Every goal category appears at least
/// once. Deterministic in `params`.
///
/// Throws GenerationError when the requested rooms do not fit the map.
SemanticGrid generate_scene(const SceneParams& params);

struct SceneStats {
  double free_area_m2 = 0.0;
  int room_count = 0;
  std::vector<int> instance_counts;  ///< per category id, 8-connected blobs
  bool operator==(const SceneStats&) const = default;
};

/// Rooms are counted as the connected parts of free space left after eroding
/// it by half a door width, which separates rooms at their doorways.
SceneStats scene_stats(const SemanticGrid& grid, double door_width_m = 0.9);

/// True when all free cells form one 4-connected region.
bool free_space_connected(const SemanticGrid& grid);

}  // namespace potnav
