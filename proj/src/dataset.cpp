#include "potnav/dataset.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "potnav/errors.hpp"
#include "potnav/map_io.hpp"
#include "potnav/raycast.hpp"
#include "potnav/rng.hpp"

namespace potnav {

namespace {

int floor_div(int a, int b) { return a / b - ((a % b != 0) && ((a < 0) != (b < 0))); }

// Position of source cell (r, c) after k counter-clockwise quarter turns of a
// height x width grid, re-centred on the original frame.
GridCell rotate_cell(int r, int c, int k, int height, int width) {
  int h = height, w = width;
  for (int i = 0; i < k; ++i) {
    const int nr = w - 1 - c;
    const int nc = r;
    r = nr;
    c = nc;
    std::swap(h, w);
  }
  return {r + floor_div(height - h, 2), c + floor_div(width - w, 2)};
}

int normal_turns(int k) { return ((k % 4) + 4) % 4; }

}  // namespace

void MaskParams::validate() const {
  if (!(square_side_m > 0.0)) throw ArgumentError("square_side_m must be > 0");
  if (!(cone_radius_m > 0.0)) throw ArgumentError("cone_radius_m must be > 0");
  if (!(cone_fov_deg > 0.0 && cone_fov_deg <= 360.0)) throw ArgumentError("cone_fov_deg must be in (0, 360]");
  if (heading_window < 1) throw ArgumentError("heading_window must be >= 1");
}

SemanticGrid augment_with(const SemanticGrid& complete, const Transform& t) {
  if (!complete.complete()) throw ArgumentError("augment: map is not complete");
  const int k = normal_turns(t.quarter_turns);
  const int h = complete.height();
  const int w = complete.width();
  SemanticGrid out(w, h, complete.resolution(), complete.categories());
  std::vector<std::uint8_t> written(out.size(), 0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      GridCell d = rotate_cell(r, c, k, h, w);
      d.row += t.drow;
      d.col += t.dcol;
      const bool free = !complete.obstacle({r, c});
      if (!out.in_bounds(d)) {
        if (free) throw ArgumentError("augment: transform moves free space off the map");
        continue;
      }
      out.set_cell(d, !free, complete.object({r, c}));
      written[out.index(d)] = 1;
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!written[i]) out.set_cell(out.cell_at(i), true);
  }
  return out;
}

Transform sample_transform(const SemanticGrid& complete, std::uint64_t seed) {
  Rng rng(seed);
  const int h = complete.height();
  const int w = complete.width();
  const int k0 = static_cast<int>(rng.below(4));
  for (int j = 0; j < 4; ++j) {
    const int k = (k0 + j) % 4;
    int rmin = h, rmax = -1, cmin = w, cmax = -1;
    for (std::size_t i = 0; i < complete.size(); ++i) {
      const GridCell s = complete.cell_at(i);
      if (complete.obstacle(s)) continue;
      const GridCell d = rotate_cell(s.row, s.col, k, h, w);
      rmin = std::min(rmin, d.row);
      rmax = std::max(rmax, d.row);
      cmin = std::min(cmin, d.col);
      cmax = std::max(cmax, d.col);
    }
    if (rmax < 0) return {};
    const int dr_lo = 1 - rmin, dr_hi = h - 2 - rmax;
    const int dc_lo = 1 - cmin, dc_hi = w - 2 - cmax;
    if (dr_lo > dr_hi || dc_lo > dc_hi) continue;
    return {k, rng.uniform_int(dr_lo, dr_hi), rng.uniform_int(dc_lo, dc_hi)};
  }
  return {};
}

SemanticGrid augment(const SemanticGrid& complete, std::uint64_t seed) {
  return augment_with(complete, sample_transform(complete, seed));
}

ExplorationMask exploration_mask(const SemanticGrid& complete, const PathPlan& path,
                                 const MaskParams& params) {
  params.validate();
  if (path.cells.empty()) throw ArgumentError("exploration_mask: empty path");
  for (const auto& c : path.cells) {
    if (!complete.in_bounds(c) || !complete.known_free(c)) {
      throw ArgumentError("exploration_mask: path cell is not free");
    }
  }
  ExplorationMask mask(complete.size(), 0);
  const double res = complete.resolution();
  if (params.strategy == MaskStrategy::kSquare) {
    const int half = static_cast<int>(std::lround(params.square_side_m / res)) / 2;
    for (const auto& p : path.cells) {
      const int r0 = std::max(0, p.row - half), r1 = std::min(complete.height() - 1, p.row + half);
      const int c0 = std::max(0, p.col - half), c1 = std::min(complete.width() - 1, p.col + half);
      for (int r = r0; r <= r1; ++r) {
        std::fill_n(mask.begin() + static_cast<std::ptrdiff_t>(complete.index({r, c0})), c1 - c0 + 1,
                    std::uint8_t{1});
      }
    }
    return mask;
  }
  const int rays = rays_for(params.cone_fov_deg, params.cone_radius_m / res);
  const auto& cells = path.cells;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    GridCell from, to;
    if (i == 0) {
      from = cells[0];
      to = cells.size() > 1 ? cells[1] : cells[0];
    } else {
      from = cells[i >= static_cast<std::size_t>(params.heading_window) ? i - params.heading_window : 0];
      to = cells[i];
    }
    const double heading =
        (from == to) ? 0.0
                     : std::atan2(-(to.row - from.row), to.col - from.col) * 180.0 / 3.14159265358979323846;
    mark_visible(complete, cells[i], heading, params.cone_fov_deg, params.cone_radius_m, rays, mask);
  }
  return mask;
}

TrainingTuple make_training_tuple(const SemanticGrid& complete, std::uint64_t seed,
                                  const MaskParams& mask_params, const PotentialParams& pf_params,
                                  std::span<const DistanceField> zone_fields) {
  mask_params.validate();
  pf_params.validate();
  if (!complete.complete()) throw ArgumentError("make_training_tuple: map is not complete");
  const auto free_mask = known_free_mask(complete);
  std::vector<GridCell> free;
  for (std::size_t i = 0; i < free_mask.size(); ++i) {
    if (free_mask[i]) free.push_back(complete.cell_at(i));
  }
  if (free.size() < 2) throw ArgumentError("make_training_tuple: map needs at least two free cells");

  Rng rng(seed);
  PathPlan path;
  bool found = false;
  for (int draw = 0; draw < 32 && !found; ++draw) {
    const GridCell a = free[static_cast<std::size_t>(rng.below(free.size()))];
    const GridCell b = free[static_cast<std::size_t>(rng.below(free.size()))];
    if (a == b) continue;
    const std::array<GridCell, 1> src{b};
    const auto field = distance_field_until(complete, src, free_mask, a);
    if (!field.reachable(a)) continue;
    path = shortest_path(field, a);
    found = true;
  }
  if (!found) throw GenerationError("make_training_tuple: no connected free-cell pair found");

  const auto mask = exploration_mask(complete, path, mask_params);
  TrainingTuple t;
  t.partial = SemanticGrid(complete.width(), complete.height(), complete.resolution(),
                           complete.categories());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) t.partial.copy_cell_from(complete, i);
  }
  t.target_area = area_potential(t.partial, complete, pf_params);
  const std::size_t n = complete.categories().size();
  t.target_objects.reserve(n);
  for (std::size_t cat = 0; cat < n; ++cat) {
    if (zone_fields.size() == n) {
      t.target_objects.push_back(object_potential(t.partial, zone_fields[cat], pf_params));
    } else {
      t.target_objects.push_back(object_potential(
          t.partial, success_zone_distance(complete, static_cast<CategoryId>(cat), pf_params.success_radius_m),
          pf_params));
    }
  }
  t.frontier_cells = frontier_cells(t.partial);
  t.provenance.seed = seed;
  return t;
}

std::vector<TrainingTuple> generate_dataset(std::span<const SceneEntry> scenes, std::size_t count,
                                            std::uint64_t seed, const MaskParams& mask_params,
                                            const PotentialParams& pf_params, bool augment_maps) {
  if (scenes.empty()) throw ArgumentError("generate_dataset: no scenes");
  std::vector<std::vector<DistanceField>> zone_cache(scenes.size());
  const auto zones_for = [&](std::size_t s) -> const std::vector<DistanceField>& {
    auto& z = zone_cache[s];
    if (z.empty()) {
      const auto& g = scenes[s].grid;
      for (std::size_t cat = 0; cat < g.categories().size(); ++cat) {
        z.push_back(success_zone_distance(g, static_cast<CategoryId>(cat), pf_params.success_radius_m));
      }
    }
    return z;
  };
  std::vector<TrainingTuple> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::uint64_t tuple_seed = derive_seed(seed, k);
    Rng rng(tuple_seed);
    const std::size_t s = static_cast<std::size_t>(rng.below(scenes.size()));
    Transform tr;
    if (augment_maps) tr = sample_transform(scenes[s].grid, derive_seed(tuple_seed, 1));
    const std::uint64_t pair_seed = derive_seed(tuple_seed, 2);
    TrainingTuple t;
    if (tr == Transform{}) {
      t = make_training_tuple(scenes[s].grid, pair_seed, mask_params, pf_params, zones_for(s));
    } else {
      t = make_training_tuple(augment_with(scenes[s].grid, tr), pair_seed, mask_params, pf_params);
    }
    t.provenance = {scenes[s].id, pair_seed, tr};
    out.push_back(std::move(t));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Binary container

namespace {

constexpr std::array<char, 4> kMagic = {'P', 'N', 'D', 'S'};
constexpr int kMaxSide = 1 << 14;
constexpr std::uint8_t kDense = 0;
constexpr std::uint8_t kFrontierSparse = 1;

class Writer {
public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void i32(std::int32_t v) { le(static_cast<std::uint32_t>(v), 4); }
  void i16(std::int16_t v) { le(static_cast<std::uint16_t>(v), 2); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

private:
  void le(std::uint64_t v, int bytes) {
    char buf[8];
    for (int i = 0; i < bytes; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out_.write(buf, bytes);
  }
  std::ostream& out_;
};

class Reader {
public:
  Reader(std::istream& in, long long record) : in_(in), record_(record) {}
  void set_record(long long r) { record_ = r; }
  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  std::int32_t i32() { return static_cast<std::int32_t>(static_cast<std::uint32_t>(le(4))); }
  std::int16_t i16() { return static_cast<std::int16_t>(static_cast<std::uint16_t>(le(2))); }
  double f64() { return std::bit_cast<double>(le(8)); }
  std::string str(std::size_t max_len) {
    const std::uint32_t n = u32();
    if (n > max_len) fail("string length " + std::to_string(n) + " exceeds limit");
    std::string s(n, '\0');
    if (!in_.read(s.data(), n)) fail("unexpected end of file");
    return s;
  }
  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, record_); }

private:
  std::uint64_t le(int bytes) {
    unsigned char buf[8];
    if (!in_.read(reinterpret_cast<char*>(buf), bytes)) fail("unexpected end of file");
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
  }
  std::istream& in_;
  long long record_;
};

bool zero_off(const PotentialField& f, const std::vector<std::uint8_t>& on) {
  const auto v = f.values();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!on[i] && std::bit_cast<std::uint64_t>(v[i]) != 0) return false;
  }
  return true;
}

void write_field(Writer& w, const PotentialField& f, const std::vector<std::uint8_t>& on,
                 std::span<const GridCell> cells) {
  if (zero_off(f, on)) {
    w.u8(kFrontierSparse);
    for (const auto& c : cells) w.f64(f.at(c));
  } else {
    w.u8(kDense);
    for (double v : f.values()) w.f64(v);
  }
}

PotentialField read_field(Reader& r, int width, int height, std::span<const GridCell> cells) {
  PotentialField f(width, height);
  const std::uint8_t enc = r.u8();
  if (enc == kDense) {
    for (auto& v : f.values()) v = r.f64();
  } else if (enc == kFrontierSparse) {
    for (const auto& c : cells) f.set(c, r.f64());
  } else {
    r.fail("unknown field encoding " + std::to_string(enc));
  }
  return f;
}

void write_record(Writer& w, const TrainingTuple& t) {
  const auto& g = t.partial;
  w.str(t.provenance.scene_id);
  w.u64(t.provenance.seed);
  w.i32(t.provenance.augmentation.quarter_turns);
  w.i32(t.provenance.augmentation.drow);
  w.i32(t.provenance.augmentation.dcol);
  w.i32(g.width());
  w.i32(g.height());
  w.f64(g.resolution());
  const auto& cats = g.categories();
  w.u32(static_cast<std::uint32_t>(cats.size()));
  for (std::size_t i = 0; i < cats.size(); ++i) {
    w.str(cats.names()[i]);
    w.u8(cats.goal_flags()[i] ? 1 : 0);
  }
  const auto expl = g.explored_channel();
  const auto obst = g.obstacle_channel();
  for (std::size_t i = 0; i < g.size(); ++i) w.u8(!expl[i] ? 0 : (obst[i] ? 2 : 1));
  for (auto v : g.object_channel()) w.i16(v);
  w.u64(t.frontier_cells.size());
  for (const auto& c : t.frontier_cells) {
    w.i32(c.row);
    w.i32(c.col);
  }
  for (const auto* f : {&t.target_area}) {
    if (f->width() != g.width() || f->height() != g.height()) {
      throw ShapeError("write_dataset: target shape differs from map");
    }
  }
  std::vector<std::uint8_t> on(g.size(), 0);
  for (const auto& c : t.frontier_cells) {
    if (!g.in_bounds(c)) throw BoundsError("write_dataset: frontier cell out of bounds");
    on[g.index(c)] = 1;
  }
  write_field(w, t.target_area, on, t.frontier_cells);
  w.u32(static_cast<std::uint32_t>(t.target_objects.size()));
  for (const auto& f : t.target_objects) {
    if (f.width() != g.width() || f.height() != g.height()) {
      throw ShapeError("write_dataset: target shape differs from map");
    }
    write_field(w, f, on, t.frontier_cells);
  }
}

TrainingTuple read_record(Reader& r) {
  TrainingTuple t;
  t.provenance.scene_id = r.str(4096);
  t.provenance.seed = r.u64();
  t.provenance.augmentation.quarter_turns = r.i32();
  t.provenance.augmentation.drow = r.i32();
  t.provenance.augmentation.dcol = r.i32();
  const int width = r.i32();
  const int height = r.i32();
  const double res = r.f64();
  if (width <= 0 || height <= 0 || width > kMaxSide || height > kMaxSide) {
    r.fail("bad map dimensions " + std::to_string(width) + "x" + std::to_string(height));
  }
  if (!(res > 0.0) || !std::isfinite(res)) r.fail("bad resolution");
  const std::uint32_t ncat = r.u32();
  if (ncat == 0 || ncat > 32767) r.fail("bad category count");
  std::vector<std::string> names;
  std::vector<bool> goals;
  for (std::uint32_t i = 0; i < ncat; ++i) {
    names.push_back(r.str(256));
    const std::uint8_t flag = r.u8();
    if (flag > 1) r.fail("bad goal flag");
    goals.push_back(flag == 1);
  }
  CategoryTable table;
  try {
    table = CategoryTable(std::move(names), std::move(goals));
  } catch (const ArgumentError& e) {
    r.fail(std::string("bad category table: ") + e.what());
  }
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  std::vector<std::uint8_t> state(n);
  for (auto& s : state) {
    s = r.u8();
    if (s > 2) r.fail("bad cell state " + std::to_string(s));
  }
  std::vector<std::int16_t> objects(n);
  for (auto& o : objects) o = r.i16();
  SemanticGrid g(width, height, res, table);
  for (std::size_t i = 0; i < n; ++i) {
    if (state[i] == 0) {
      if (objects[i] != kNoCategory) r.fail("object on an unexplored cell");
      continue;
    }
    if (objects[i] != kNoCategory && !table.contains(objects[i])) {
      r.fail("unknown category id " + std::to_string(objects[i]));
    }
    g.set_cell(g.cell_at(i), state[i] == 2, objects[i]);
  }
  t.partial = std::move(g);
  const std::uint64_t nf = r.u64();
  if (nf > n) r.fail("frontier count exceeds cell count");
  for (std::uint64_t i = 0; i < nf; ++i) {
    const GridCell c{r.i32(), r.i32()};
    if (!t.partial.in_bounds(c)) r.fail("frontier cell out of bounds");
    t.frontier_cells.push_back(c);
  }
  t.target_area = read_field(r, width, height, t.frontier_cells);
  const std::uint32_t nobj = r.u32();
  if (nobj > ncat) r.fail("more object targets than categories");
  for (std::uint32_t i = 0; i < nobj; ++i) {
    t.target_objects.push_back(read_field(r, width, height, t.frontier_cells));
  }
  return t;
}

}  // namespace

void write_dataset(std::ostream& out, std::span<const TrainingTuple> tuples) {
  Writer w(out);
  out.write(kMagic.data(), kMagic.size());
  w.u32(kDatasetFormatVersion);
  w.u64(tuples.size());
  for (const auto& t : tuples) write_record(w, t);
}

std::vector<TrainingTuple> read_dataset(std::istream& in) {
  Reader r(in, -1);
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) r.fail("not a dataset file (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kDatasetFormatVersion) r.fail("unsupported dataset version " + std::to_string(version));
  const std::uint64_t count = r.u64();
  std::vector<TrainingTuple> out;
  for (std::uint64_t k = 0; k < count; ++k) {
    r.set_record(static_cast<long long>(k));
    out.push_back(read_record(r));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ParseError("trailing data after last record", static_cast<long long>(count));
  }
  return out;
}

void save_dataset(const std::filesystem::path& path, std::span<const TrainingTuple> tuples) {
  std::ostringstream out(std::ios::binary);
  write_dataset(out, tuples);
  write_file_atomic(path, out.str());
}

std::vector<TrainingTuple> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_dataset(in);
}

}  // namespace potnav
