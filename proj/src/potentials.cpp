#include "potnav/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "potnav/errors.hpp"

namespace potnav {

PotentialField::PotentialField(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw ShapeError("potential field: value count does not match shape");
  }
}

double PotentialField::at(GridCell c) const {
  if (c.row < 0 || c.row >= height_ || c.col < 0 || c.col >= width_) {
    throw BoundsError("potential field: cell out of bounds");
  }
  return values_[static_cast<std::size_t>(c.row) * width_ + c.col];
}

void PotentialField::set(GridCell c, double v) {
  if (c.row < 0 || c.row >= height_ || c.col < 0 || c.col >= width_) {
    throw BoundsError("potential field: cell out of bounds");
  }
  values_[static_cast<std::size_t>(c.row) * width_ + c.col] = v;
}

bool PotentialField::in_unit_range() const noexcept {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return v >= 0.0 && v <= 1.0; });
}

void PotentialParams::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ArgumentError("alpha must lie in [0, 1], got " + std::to_string(alpha));
  }
  if (!(d_max > 0.0)) throw ArgumentError("d_max must be > 0, got " + std::to_string(d_max));
  if (!(success_radius_m >= 0.0)) throw ArgumentError("success_radius_m must be >= 0");
  if (beta.has_value() != gamma.has_value()) {
    throw ArgumentError("beta and gamma must be given together");
  }
  if (beta) {
    if (!(*beta >= 0.0)) throw ArgumentError("beta must be >= 0");
    if (!(*gamma >= 0.0)) throw ArgumentError("gamma must be >= 0");
    if (std::abs(alpha + *beta + *gamma - 1.0) > 1e-9) {
      throw ArgumentError("alpha + beta + gamma must equal 1");
    }
  }
  if (area_norm == AreaNorm::kFixedConstant && !(area_norm_constant_m2 > 0.0)) {
    throw ArgumentError("area_norm_constant_m2 must be > 0 for fixed-constant normalisation");
  }
}

std::vector<GridCell> frontier_cells(const SemanticGrid& grid) {
  const auto mask = frontier_mask(grid);
  std::vector<GridCell> out;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) out.push_back(grid.cell_at(i));
  }
  return out;
}

namespace {

// Labels 8-connected regions of `member`; -1 outside. Returns the region
// count and, if asked, the cell count of each region.
int label_image(int w, int h, std::span<const std::uint8_t> member, std::vector<int>& labels,
                std::vector<std::size_t>* sizes) {
  // Raster union-find over the already-visited 8-neighbours. Each tree is
  // rooted at its first cell, so ids follow raster order of first cells.
  std::vector<int> parent(member.size(), -1);
  auto find = [&](int i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  };
  auto unite = [&](int a, int b) {
    a = find(a);
    b = find(b);
    if (a < b) {
      parent[b] = a;
    } else if (b < a) {
      parent[a] = b;
    }
  };
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const int i = r * w + c;
      if (!member[i]) continue;
      const int up = i - w;
      if (r > 0 && member[up]) {
        // the other scanned neighbours all touch `up` and are joined already
        parent[i] = up;
        continue;
      }
      parent[i] = i;
      if (c > 0 && member[i - 1]) unite(i, i - 1);
      if (r > 0) {
        if (c > 0 && member[up - 1]) unite(i, up - 1);
        if (c + 1 < w && member[up + 1]) unite(i, up + 1);
      }
    }
  }
  labels.assign(member.size(), -1);
  int n = 0;
  for (int i = 0; i < static_cast<int>(member.size()); ++i) {
    if (!member[i]) continue;
    const int root = find(i);
    if (root == i) {
      labels[i] = n++;
      if (sizes) sizes->push_back(0);
    } else {
      labels[i] = labels[root];
    }
    if (sizes) ++(*sizes)[static_cast<std::size_t>(labels[i])];
  }
  return n;
}

}  // namespace

PotentialField area_potential(const SemanticGrid& partial, const SemanticGrid& complete,
                              const PotentialParams& params) {
  require_same_shape(partial, complete, "area_potential");
  return area_potential(partial, complete, params, frontier_mask(partial));
}

PotentialField area_potential(const SemanticGrid& partial, const SemanticGrid& complete,
                              const PotentialParams& params, std::span<const std::uint8_t> fmask_in) {
  require_same_shape(partial, complete, "area_potential");
  if (!complete.complete()) throw ArgumentError("area_potential: reference map is not complete");
  params.validate();

  double normaliser = 0.0;
  double cell_area = 1.0;
  if (params.area_norm == AreaNorm::kTotalFreeSpace) {
    normaliser = static_cast<double>(count_free_cells(complete));
  } else {
    normaliser = params.area_norm_constant_m2;
    cell_area = complete.resolution() * complete.resolution();
  }
  if (!(normaliser > 0.0)) throw ArgumentError("area_potential: zero normaliser");

  PotentialField out(partial.width(), partial.height());
  if (fmask_in.size() != partial.size()) throw ShapeError("area_potential: frontier mask size differs");
  const auto fmask = fmask_in;
  std::vector<int> frontier_label;
  const int nfrontiers = label_image(partial.width(), partial.height(), fmask, frontier_label, nullptr);
  if (nfrontiers == 0) return out;

  const auto explored = partial.explored_channel();
  const auto truth_obstacle = complete.obstacle_channel();
  std::vector<std::uint8_t> hidden_free(partial.size(), 0);
  for (std::size_t i = 0; i < hidden_free.size(); ++i) hidden_free[i] = !explored[i] && !truth_obstacle[i];
  std::vector<int> comp_label;
  std::vector<std::size_t> comp_size;
  label_image(partial.width(), partial.height(), hidden_free, comp_label, &comp_size);

  // Distinct (frontier, component) adjacencies.
  const int w = partial.width();
  const int h = partial.height();
  std::vector<std::pair<int, int>> links;
  for (std::size_t i = 0; i < fmask.size(); ++i) {
    if (!fmask[i]) continue;
    const int r = static_cast<int>(i) / w;
    const int c = static_cast<int>(i) % w;
    for (const auto& [dr, dc] : kNeighbors8) {
      const int nr = r + dr;
      const int nc = c + dc;
      if (nr < 0 || nr >= h || nc < 0 || nc >= w) continue;
      const int comp = comp_label[static_cast<std::size_t>(nr) * w + nc];
      if (comp >= 0) links.emplace_back(frontier_label[i], comp);
    }
  }
  std::sort(links.begin(), links.end());
  links.erase(std::unique(links.begin(), links.end()), links.end());
  std::vector<std::size_t> hidden(static_cast<std::size_t>(nfrontiers), 0);
  for (const auto& [f, comp] : links) hidden[static_cast<std::size_t>(f)] += comp_size[static_cast<std::size_t>(comp)];

  std::vector<double> value(hidden.size());
  for (std::size_t f = 0; f < hidden.size(); ++f) {
    const double v = params.area_norm == AreaNorm::kTotalFreeSpace
                         ? static_cast<double>(hidden[f]) / normaliser
                         : (static_cast<double>(hidden[f]) * cell_area) / normaliser;
    value[f] = std::min(v, 1.0);
  }
  auto values = out.values();
  for (std::size_t i = 0; i < fmask.size(); ++i) {
    if (fmask[i]) values[i] = value[static_cast<std::size_t>(frontier_label[i])];
  }
  return out;
}

PotentialField object_potential(const SemanticGrid& partial, const DistanceField& zone_distance,
                                const PotentialParams& params) {
  return object_potential(partial, zone_distance, params, frontier_mask(partial));
}

PotentialField object_potential(const SemanticGrid& partial, const DistanceField& zone_distance,
                                const PotentialParams& params, std::span<const std::uint8_t> mask) {
  params.validate();
  if (mask.size() != partial.size()) throw ShapeError("object_potential: frontier mask size differs");
  if (zone_distance.width() != partial.width() || zone_distance.height() != partial.height()) {
    throw ShapeError("object_potential: distance field shape differs from map");
  }
  PotentialField out(partial.width(), partial.height());
  const auto dist = zone_distance.values();
  auto values = out.values();
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i] || dist[i] == kUnreachable) continue;
    values[i] = std::max(1.0 - dist[i] / params.d_max, 0.0);
  }
  return out;
}

PotentialField object_potential(const SemanticGrid& partial, const SemanticGrid& complete,
                                CategoryId category, const PotentialParams& params) {
  require_same_shape(partial, complete, "object_potential");
  if (!complete.complete()) throw ArgumentError("object_potential: reference map is not complete");
  return object_potential(partial,
                          success_zone_distance(complete, category, params.success_radius_m),
                          params);
}

PotentialField combine(const PotentialField& area, const PotentialField& object,
                       const PotentialParams& params) {
  if (!area.same_shape(object)) throw ShapeError("combine: field shapes differ");
  params.validate();
  PotentialField out(area.width(), area.height());
  const auto a = area.values();
  const auto o = object.values();
  auto u = out.values();
  const double alpha = params.alpha;
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = alpha * a[i] + (1.0 - alpha) * o[i];
  return out;
}

PotentialField distance_potential(const SemanticGrid& partial, GridCell agent, double horizon_m) {
  if (!(horizon_m > 0.0)) throw ArgumentError("distance_potential: horizon must be > 0");
  if (!partial.in_bounds(agent)) throw ArgumentError("distance_potential: agent out of bounds");
  if (!partial.known_free(agent)) {
    throw ArgumentError("distance_potential: agent must stand on an explored free cell");
  }
  const std::vector<GridCell> src{agent};
  const auto field = distance_field(partial, src, known_free_mask(partial));
  PotentialField out(partial.width(), partial.height());
  const auto d = field.values();
  auto u = out.values();
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (d[i] == kUnreachable) continue;
    u[i] = std::max(1.0 - d[i] / horizon_m, 0.0);
  }
  return out;
}

PotentialField combine_with_action_cost(const PotentialField& area, const PotentialField& object,
                                        const PotentialField& distance,
                                        const PotentialParams& params) {
  if (!area.same_shape(object) || !area.same_shape(distance)) {
    throw ShapeError("combine_with_action_cost: field shapes differ");
  }
  if (!params.beta || !params.gamma) {
    throw ArgumentError("combine_with_action_cost: beta and gamma are required");
  }
  params.validate();
  PotentialField out(area.width(), area.height());
  const auto a = area.values();
  const auto o = object.values();
  const auto d = distance.values();
  auto u = out.values();
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i] = params.alpha * a[i] + *params.beta * o[i] + *params.gamma * d[i];
  }
  return out;
}

std::optional<GridCell> sample_long_term_goal(const PotentialField& potential,
                                              const SemanticGrid& partial, GridCell agent) {
  return sample_long_term_goal(potential, partial, agent, frontier_mask(partial));
}

std::optional<GridCell> sample_long_term_goal(const PotentialField& potential,
                                              const SemanticGrid& partial, GridCell agent,
                                              std::span<const std::uint8_t> frontier) {
  if (potential.width() != partial.width() || potential.height() != partial.height()) {
    throw ShapeError("sample_long_term_goal: field shape differs from map");
  }
  if (frontier.size() != partial.size()) throw ShapeError("sample_long_term_goal: frontier mask size differs");
  const auto explored = partial.explored_channel();
  const auto u = potential.values();
  auto value = [&](std::size_t i) { return (explored[i] && !frontier[i]) ? 0.0 : u[i]; };
  double best = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) best = std::max(best, value(i));
  std::vector<std::uint8_t> tied(u.size(), 0);
  std::size_t n_tied = 0;
  std::size_t first = 0;
  if (best > 0.0) {
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (value(i) != best) continue;
      if (n_tied++ == 0) first = i;
      tied[i] = 1;
    }
  }
  if (n_tied == 0) return std::nullopt;
  if (n_tied == 1) return partial.cell_at(first);
  if (partial.in_bounds(agent)) {
    if (const auto nt = nearest_target(partial, agent, planning_mask(partial, 0), tied)) {
      return nt->cell;
    }
  }
  return partial.cell_at(first);
}

PfLoss pf_loss(const PotentialField& predicted_area,
               std::span<const PotentialField> predicted_objects,
               const PotentialField& target_area, std::span<const PotentialField> target_objects,
               std::span<const GridCell> frontier_cells) {
  if (frontier_cells.empty()) throw ArgumentError("pf_loss: empty frontier set");
  if (predicted_objects.size() != target_objects.size()) {
    throw ShapeError("pf_loss: predicted and target category counts differ");
  }
  if (!predicted_area.same_shape(target_area)) throw ShapeError("pf_loss: area shapes differ");
  for (std::size_t n = 0; n < target_objects.size(); ++n) {
    if (!predicted_objects[n].same_shape(target_area) || !target_objects[n].same_shape(target_area)) {
      throw ShapeError("pf_loss: object field shapes differ");
    }
  }
  double sum_a = 0.0;
  double sum_o = 0.0;
  for (const auto& x : frontier_cells) {
    const double ea = predicted_area.at(x) - target_area.at(x);
    sum_a += ea * ea;
    for (std::size_t n = 0; n < target_objects.size(); ++n) {
      const double eo = predicted_objects[n].at(x) - target_objects[n].at(x);
      sum_o += eo * eo;
    }
  }
  const double f = static_cast<double>(frontier_cells.size());
  PfLoss loss;
  loss.area = sum_a / f;
  loss.object = target_objects.empty() ? 0.0
                                       : sum_o / (f * static_cast<double>(target_objects.size()));
  return loss;
}

}  // namespace potnav
