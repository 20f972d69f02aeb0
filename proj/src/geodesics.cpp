#include "potnav/geodesics.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

#include "potnav/errors.hpp"

namespace potnav {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

using HeapEntry = std::pair<double, std::uint32_t>;
using MinHeap = std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>>;

// Per-thread search buffers reused across calls. A cell's entries are live
// only while its stamp equals the current generation, so nothing is cleared
// between searches. Equal keys pop in index (row-major) order.
class SearchScratch {
public:
  void begin(std::size_t n) {
    if (seen_.size() < n) {
      key_.resize(n);
      axial_.resize(n);
      diag_.resize(n);
      seen_.assign(n, 0);
      closed_.assign(n, 0);
    }
    if (++gen_ == 0) {
      std::fill(seen_.begin(), seen_.end(), 0);
      std::fill(closed_.begin(), closed_.end(), 0);
      gen_ = 1;
    }
    touched_.clear();
    heap_.clear();
  }
  double key(std::size_t i) const { return seen_[i] == gen_ ? key_[i] : kUnreachable; }
  std::int32_t axial(std::size_t i) const { return axial_[i]; }
  std::int32_t diag(std::size_t i) const { return diag_[i]; }
  void relax(std::size_t i, double k, std::int32_t a, std::int32_t b, double priority) {
    if (seen_[i] != gen_) {
      seen_[i] = gen_;
      touched_.push_back(static_cast<std::uint32_t>(i));
    }
    key_[i] = k;
    axial_[i] = a;
    diag_[i] = b;
    heap_.emplace_back(priority, static_cast<std::uint32_t>(i));
    std::push_heap(heap_.begin(), heap_.end(), std::greater<>{});
  }
  bool closed(std::size_t i) const { return closed_[i] == gen_; }
  void close(std::size_t i) { closed_[i] = gen_; }
  bool empty() const { return heap_.empty(); }
  const HeapEntry& top() const { return heap_.front(); }
  void pop() {
    std::pop_heap(heap_.begin(), heap_.end(), std::greater<>{});
    heap_.pop_back();
  }
  std::span<const std::uint32_t> touched() const { return touched_; }

private:
  std::vector<double> key_;
  std::vector<std::int32_t> axial_;
  std::vector<std::int32_t> diag_;
  std::vector<std::uint32_t> seen_;
  std::vector<std::uint32_t> closed_;
  std::uint32_t gen_ = 0;
  std::vector<std::uint32_t> touched_;
  std::vector<HeapEntry> heap_;
};

SearchScratch& scratch() {
  thread_local SearchScratch s;
  return s;
}

// Absorbs rounding in estimate sums; distinct path lengths on any realistic
// grid differ by far more.
constexpr double kTieSlack = 1e-7;

void check_sources(const SemanticGrid& grid, std::span<const GridCell> sources,
                   std::span<const std::uint8_t> traversable) {
  if (traversable.size() != grid.size()) {
    throw ShapeError("distance_field: traversable mask size does not match grid");
  }
  if (sources.empty()) throw ArgumentError("distance_field: empty source set");
  for (const auto& s : sources) {
    if (!grid.in_bounds(s)) {
      throw ArgumentError("distance_field: source (" + std::to_string(s.row) + "," +
                          std::to_string(s.col) + ") out of bounds");
    }
    if (!traversable[grid.index(s)]) {
      throw ArgumentError("distance_field: source (" + std::to_string(s.row) + "," +
                          std::to_string(s.col) + ") is not traversable");
    }
  }
}

// Diagonal moves need at least one traversable axial cell.
inline bool diagonal_open(std::span<const std::uint8_t> trav, int w, int r, int c, int dr, int dc) {
  return trav[static_cast<std::size_t>(r + dr) * w + c] ||
         trav[static_cast<std::size_t>(r) * w + (c + dc)];
}

struct SearchStop {
  GridCell target;
  bool guided = false;    // order by distance + octile estimate to target
  double margin = 0.0;    // keep settling until keys exceed d(target) + margin (cells)
};

// Distances are tracked as (axial, diagonal) step counts; the metric value
// is octile_meters(), which is unique per count pair, so ties and exact
// comparisons do not depend on summation order. The octile estimate is
// consistent, so a guided search still settles cells with exact counts.
std::vector<double> dijkstra(const SemanticGrid& grid, std::span<const GridCell> sources,
                             std::span<const std::uint8_t> trav, std::optional<SearchStop> stop_at) {
  const int w = grid.width();
  const int h = grid.height();
  const bool guided = stop_at && stop_at->guided;
  const int tr = stop_at ? stop_at->target.row : 0;
  const int tc = stop_at ? stop_at->target.col : 0;
  auto estimate = [&](int r, int c) {
    if (!guided) return 0.0;
    const int dr = std::abs(r - tr);
    const int dc = std::abs(c - tc);
    return static_cast<double>(std::max(dr, dc) - std::min(dr, dc)) + std::min(dr, dc) * kSqrt2;
  };
  auto& st = scratch();
  st.begin(grid.size());
  for (const auto& s : sources) {
    const auto i = grid.index(s);
    if (st.key(i) != 0.0) st.relax(i, 0.0, 0, 0, estimate(s.row, s.col));
  }
  const std::size_t stop = stop_at ? grid.index(stop_at->target) : grid.size();
  double limit = kUnreachable;
  while (!st.empty()) {
    const auto [d, ui] = st.top();
    if (d > limit) break;
    st.pop();
    if (st.closed(ui)) continue;
    st.close(ui);
    if (ui == stop) {
      if (!(stop_at->margin > 0.0)) break;
      limit = st.key(ui) + stop_at->margin;
    }
    const int r = static_cast<int>(ui / w);
    const int c = static_cast<int>(ui % w);
    for (const auto& [dr, dc] : kNeighbors8) {
      const int nr = r + dr;
      const int nc = c + dc;
      if (nr < 0 || nr >= h || nc < 0 || nc >= w) continue;
      const std::size_t j = static_cast<std::size_t>(nr) * w + nc;
      if (!trav[j] || st.closed(j)) continue;
      const bool is_diag = dr != 0 && dc != 0;
      if (is_diag && !diagonal_open(trav, w, r, c, dr, dc)) continue;
      const std::int32_t a = st.axial(ui) + (is_diag ? 0 : 1);
      const std::int32_t b = st.diag(ui) + (is_diag ? 1 : 0);
      const double nk = static_cast<double>(a) + static_cast<double>(b) * kSqrt2;
      if (nk < st.key(j)) st.relax(j, nk, a, b, nk + estimate(nr, nc));
    }
  }
  std::vector<double> dist(grid.size(), kUnreachable);
  for (const auto i : st.touched()) dist[i] = octile_meters(st.axial(i), st.diag(i), grid.resolution());
  return dist;
}

constexpr int kFmmExactRadiusCells = 3;

// Samples the segment between cell centres at quarter-cell spacing.
bool line_of_sight(std::span<const std::uint8_t> trav, int w, GridCell a, GridCell b) {
  const double dr = b.row - a.row;
  const double dc = b.col - a.col;
  const int n = static_cast<int>(std::ceil(4.0 * std::max(std::abs(dr), std::abs(dc))));
  for (int k = 1; k < n; ++k) {
    const double t = static_cast<double>(k) / n;
    const int r = static_cast<int>(std::floor(a.row + 0.5 + t * dr));
    const int c = static_cast<int>(std::floor(a.col + 0.5 + t * dc));
    if (!trav[static_cast<std::size_t>(r) * w + c]) return false;
  }
  return true;
}

std::vector<double> fast_marching(const SemanticGrid& grid, std::span<const GridCell> sources,
                                  std::span<const std::uint8_t> trav) {
  const int w = grid.width();
  const int h = grid.height();
  const double step = grid.resolution();
  std::vector<double> t(grid.size(), kUnreachable);
  std::vector<std::uint8_t> known(grid.size(), 0);
  MinHeap heap;

  auto frozen = [&](int r, int c) {
    if (r < 0 || r >= h || c < 0 || c >= w) return kUnreachable;
    const std::size_t j = static_cast<std::size_t>(r) * w + c;
    return known[j] ? t[j] : kUnreachable;
  };
  auto solve = [&](int r, int c) {
    const double a = std::min(frozen(r, c - 1), frozen(r, c + 1));
    const double b = std::min(frozen(r - 1, c), frozen(r + 1, c));
    if (a == kUnreachable && b == kUnreachable) return kUnreachable;
    if (std::abs(a - b) >= step) return std::min(a, b) + step;
    const double diff = a - b;
    return 0.5 * (a + b + std::sqrt(2.0 * step * step - diff * diff));
  };

  // Cells with a clear straight line to a nearby source start from the exact
  // Euclidean distance; the first-order stencil is poor within a few cells of
  // a point source.
  const int r0 = kFmmExactRadiusCells;
  for (const auto& s : sources) {
    for (int dr = -r0; dr <= r0; ++dr) {
      for (int dc = -r0; dc <= r0; ++dc) {
        const int r = s.row + dr;
        const int c = s.col + dc;
        if (r < 0 || r >= h || c < 0 || c >= w || dr * dr + dc * dc > r0 * r0) continue;
        const std::size_t j = static_cast<std::size_t>(r) * w + c;
        if (!trav[j] || !line_of_sight(trav, w, s, {r, c})) continue;
        const double e = step * std::sqrt(static_cast<double>(dr * dr + dc * dc));
        if (e < t[j]) {
          t[j] = e;
          heap.emplace(e, static_cast<std::uint32_t>(j));
        }
      }
    }
  }
  constexpr std::array<std::array<int, 2>, 4> kAxial = {{{-1, 0}, {0, -1}, {0, 1}, {1, 0}}};
  while (!heap.empty()) {
    const auto [d, ui] = heap.top();
    heap.pop();
    if (known[ui] || d > t[ui]) continue;
    known[ui] = 1;
    const int r = static_cast<int>(ui / w);
    const int c = static_cast<int>(ui % w);
    for (const auto& [dr, dc] : kAxial) {
      const int nr = r + dr;
      const int nc = c + dc;
      if (nr < 0 || nr >= h || nc < 0 || nc >= w) continue;
      const std::size_t j = static_cast<std::size_t>(nr) * w + nc;
      if (!trav[j] || known[j]) continue;
      const double nt = solve(nr, nc);
      if (nt < t[j]) {
        t[j] = nt;
        heap.emplace(nt, static_cast<std::uint32_t>(j));
      }
    }
  }
  return t;
}

}  // namespace

DistanceField::DistanceField(int width, int height, double resolution, std::vector<double> dist,
                             TraversableMask traversable)
    : width_(width),
      height_(height),
      resolution_(resolution),
      dist_(std::move(dist)),
      traversable_(std::move(traversable)) {}

double DistanceField::at(GridCell c) const {
  if (!in_bounds(c)) {
    throw BoundsError("distance field: cell (" + std::to_string(c.row) + "," +
                      std::to_string(c.col) + ") out of bounds");
  }
  return dist_[index(c)];
}

TraversableMask known_free_mask(const SemanticGrid& grid) {
  const auto explored = grid.explored_channel();
  const auto obstacle = grid.obstacle_channel();
  TraversableMask mask(grid.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = (explored[i] && !obstacle[i]) ? 1 : 0;
  return mask;
}

TraversableMask planning_mask(const SemanticGrid& partial, int dilation_cells) {
  const int w = partial.width();
  const int h = partial.height();
  const auto explored = partial.explored_channel();
  const auto obstacle = partial.obstacle_channel();
  TraversableMask mask(partial.size(), 1);
  const int k = std::max(0, dilation_cells);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * w + c;
      if (!explored[i] || !obstacle[i]) continue;
      for (int rr = std::max(0, r - k); rr <= std::min(h - 1, r + k); ++rr) {
        for (int cc = std::max(0, c - k); cc <= std::min(w - 1, c + k); ++cc) {
          mask[static_cast<std::size_t>(rr) * w + cc] = 0;
        }
      }
    }
  }
  return mask;
}

DistanceField distance_field(const SemanticGrid& grid, std::span<const GridCell> sources,
                             std::span<const std::uint8_t> traversable, DistanceMode mode) {
  check_sources(grid, sources, traversable);
  auto dist = mode == DistanceMode::kDijkstraOctile
                  ? dijkstra(grid, sources, traversable, std::nullopt)
                  : fast_marching(grid, sources, traversable);
  return DistanceField(grid.width(), grid.height(), grid.resolution(), std::move(dist),
                       TraversableMask(traversable.begin(), traversable.end()));
}

DistanceField distance_field(const SemanticGrid& grid, std::span<const GridCell> sources,
                             const std::function<bool(GridCell)>& traversable,
                             DistanceMode mode) {
  TraversableMask mask(grid.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = traversable(grid.cell_at(i)) ? 1 : 0;
  return distance_field(grid, sources, mask, mode);
}

DistanceField distance_field_until(const SemanticGrid& grid, std::span<const GridCell> sources,
                                   std::span<const std::uint8_t> traversable, GridCell target) {
  check_sources(grid, sources, traversable);
  if (!grid.in_bounds(target)) throw ArgumentError("distance_field_until: target out of bounds");
  auto dist = dijkstra(grid, sources, traversable, SearchStop{target});
  return DistanceField(grid.width(), grid.height(), grid.resolution(), std::move(dist),
                       TraversableMask(traversable.begin(), traversable.end()));
}

DistanceField distance_field_near(const SemanticGrid& grid, std::span<const GridCell> sources,
                                  std::span<const std::uint8_t> traversable, GridCell target,
                                  double radius_m) {
  check_sources(grid, sources, traversable);
  if (!grid.in_bounds(target)) throw ArgumentError("distance_field_near: target out of bounds");
  if (!(radius_m >= 0.0)) throw ArgumentError("distance_field_near: radius must be >= 0");
  const double margin = 2.0 * radius_m / grid.resolution();
  auto dist = dijkstra(grid, sources, traversable, SearchStop{target, true, margin});
  return DistanceField(grid.width(), grid.height(), grid.resolution(), std::move(dist),
                       TraversableMask(traversable.begin(), traversable.end()));
}

PathPlan shortest_path(const DistanceField& field, GridCell start) {
  if (!field.in_bounds(start)) throw BoundsError("shortest_path: start out of bounds");
  if (!field.reachable(start)) {
    throw NoPathError("shortest_path: start (" + std::to_string(start.row) + "," +
                      std::to_string(start.col) + ") is unreachable");
  }
  const int w = field.width();
  const int h = field.height();
  const double axial = field.resolution();
  const double diag = field.resolution() * kSqrt2;
  const auto dist = field.values();
  const auto trav = field.traversable();

  PathPlan plan;
  std::int64_t n_axial = 0;
  std::int64_t n_diag = 0;
  GridCell cur = start;
  plan.cells.push_back(cur);
  while (dist[field.index(cur)] > 0.0) {
    const double here = dist[field.index(cur)];
    const double tol = 1e-9 * std::max(1.0, here);
    std::optional<GridCell> exact;
    bool exact_diag = false;
    std::optional<GridCell> lowest;
    double lowest_val = here;
    bool lowest_diag = false;
    for (const auto& [dr, dc] : kNeighbors8) {
      const GridCell n{cur.row + dr, cur.col + dc};
      if (n.row < 0 || n.row >= h || n.col < 0 || n.col >= w) continue;
      const bool is_diag = dr != 0 && dc != 0;
      if (is_diag && !diagonal_open(trav, w, cur.row, cur.col, dr, dc)) continue;
      const double dn = dist[field.index(n)];
      if (!(dn < here)) continue;
      const double cost = is_diag ? diag : axial;
      // kNeighbors8 is row-major, so the first match is the lexicographic minimum.
      if (!exact && std::abs(dn + cost - here) <= tol) {
        exact = n;
        exact_diag = is_diag;
      }
      if (dn < lowest_val) {
        lowest_val = dn;
        lowest = n;
        lowest_diag = is_diag;
      }
    }
    bool moved_diag = false;
    if (exact) {
      cur = *exact;
      moved_diag = exact_diag;
    } else if (lowest) {
      cur = *lowest;
      moved_diag = lowest_diag;
    } else {
      throw NoPathError("shortest_path: descent stalled");
    }
    (moved_diag ? n_diag : n_axial) += 1;
    plan.cells.push_back(cur);
  }
  plan.length_m = octile_meters(n_axial, n_diag, field.resolution());
  return plan;
}

DistanceField success_zone_distance(const SemanticGrid& complete, CategoryId category,
                                    double d_s) {
  if (!complete.categories().contains(category)) {
    throw ArgumentError("success_zone_distance: unknown category id " + std::to_string(category));
  }
  if (!complete.complete()) throw ArgumentError("success_zone_distance: map is not complete");
  if (!(d_s >= 0.0)) throw ArgumentError("success_zone_distance: d_s must be >= 0");

  const auto objects = complete.object_channel();
  auto free = known_free_mask(complete);
  std::vector<GridCell> instances;
  auto reach = free;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (objects[i] == category) {
      instances.push_back(complete.cell_at(i));
      reach[i] = 1;
    }
  }
  if (instances.empty()) {
    return DistanceField(complete.width(), complete.height(), complete.resolution(),
                         std::vector<double>(complete.size(), kUnreachable), std::move(free));
  }
  const auto to_object = dijkstra(complete, instances, reach, std::nullopt);
  constexpr double kZoneSlack = 1e-9;
  std::vector<GridCell> zone;
  for (std::size_t i = 0; i < to_object.size(); ++i) {
    if (free[i] && to_object[i] <= d_s + kZoneSlack) zone.push_back(complete.cell_at(i));
  }
  if (zone.empty()) {
    return DistanceField(complete.width(), complete.height(), complete.resolution(),
                         std::vector<double>(complete.size(), kUnreachable), std::move(free));
  }
  return distance_field(complete, zone, free, DistanceMode::kDijkstraOctile);
}

std::optional<NearestTarget> nearest_target(const SemanticGrid& grid, GridCell source,
                                            std::span<const std::uint8_t> traversable,
                                            std::span<const std::uint8_t> targets) {
  if (traversable.size() != grid.size() || targets.size() != grid.size()) {
    throw ShapeError("nearest_target: mask size does not match grid");
  }
  if (!grid.in_bounds(source)) throw ArgumentError("nearest_target: source out of bounds");
  const int w = grid.width();
  const int h = grid.height();
  // Guided by the octile distance to the targets' bounding box, a
  // consistent lower bound. Once the nearest distance D is known, cells with
  // estimate-sum up to D are still settled so that every target at distance
  // D is seen and the smallest index wins, as in a plain search.
  int r0 = h, r1 = -1, c0 = w, c1 = -1;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (!targets[i]) continue;
    const int r = static_cast<int>(i / w);
    const int c = static_cast<int>(i % w);
    r0 = std::min(r0, r);
    r1 = std::max(r1, r);
    c0 = std::min(c0, c);
    c1 = std::max(c1, c);
  }
  if (r1 < 0) return std::nullopt;
  auto estimate = [&](std::size_t i) {
    const int r = static_cast<int>(i / w);
    const int c = static_cast<int>(i % w);
    const int dr = std::max({r0 - r, r - r1, 0});
    const int dc = std::max({c0 - c, c - c1, 0});
    return static_cast<double>(std::max(dr, dc) - std::min(dr, dc)) + std::min(dr, dc) * kSqrt2;
  };
  auto& st = scratch();
  st.begin(grid.size());
  const auto s = grid.index(source);
  st.relax(s, 0.0, 0, 0, estimate(s));
  std::optional<std::size_t> best;
  double best_d = kUnreachable;
  while (!st.empty()) {
    const auto [f, ui] = st.top();
    if (best && f > best_d + kTieSlack) break;
    st.pop();
    if (st.closed(ui)) continue;
    st.close(ui);
    if (targets[ui]) {
      const double d = st.key(ui);
      if (!best || d < best_d || (d == best_d && ui < *best)) {
        best = ui;
        best_d = d;
      }
      continue;
    }
    if (!traversable[ui] && ui != s) continue;
    const int r = static_cast<int>(ui / w);
    const int c = static_cast<int>(ui % w);
    for (const auto& [dr, dc] : kNeighbors8) {
      const int nr = r + dr;
      const int nc = c + dc;
      if (nr < 0 || nr >= h || nc < 0 || nc >= w) continue;
      const std::size_t j = static_cast<std::size_t>(nr) * w + nc;
      if (st.closed(j) || (!traversable[j] && !targets[j])) continue;
      const bool is_diag = dr != 0 && dc != 0;
      if (is_diag && !diagonal_open(traversable, w, r, c, dr, dc)) continue;
      const std::int32_t a = st.axial(ui) + (is_diag ? 0 : 1);
      const std::int32_t b = st.diag(ui) + (is_diag ? 1 : 0);
      const double nk = static_cast<double>(a) + static_cast<double>(b) * kSqrt2;
      if (nk < st.key(j)) st.relax(j, nk, a, b, nk + estimate(j));
    }
  }
  if (best) {
    return NearestTarget{grid.cell_at(*best),
                         octile_meters(st.axial(*best), st.diag(*best), grid.resolution())};
  }
  return std::nullopt;
}

}  // namespace potnav
