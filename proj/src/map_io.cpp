#include "potnav/map_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "potnav/errors.hpp"

namespace potnav {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view token) {
  double v = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw ParseError("invalid number '" + std::string(token) + "'");
  }
  return v;
}

namespace {

template <typename T>
T parse_int(std::string_view token) {
  T v{};
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
    throw ParseError("invalid integer '" + std::string(token) + "'");
  }
  return v;
}

std::string expect_key(std::istream& in, std::string_view key) {
  std::string k;
  std::string v;
  if (!(in >> k >> v)) throw ParseError("map header: missing '" + std::string(key) + "'");
  if (k != key) throw ParseError("map header: expected '" + std::string(key) + "', got '" + k + "'");
  return v;
}

}  // namespace

// Cell tokens: '-' unexplored, '.' free, '#' obstacle; a category id may
// follow '.' or '#'.
void write_map(std::ostream& out, const SemanticGrid& grid) {
  const auto& cats = grid.categories();
  out << "SEMGRID " << kMapFormatVersion << '\n';
  out << "width " << grid.width() << '\n';
  out << "height " << grid.height() << '\n';
  out << "resolution " << format_double(grid.resolution()) << '\n';
  out << "categories " << cats.size() << '\n';
  for (std::size_t i = 0; i < cats.size(); ++i) {
    out << cats.names()[i] << ' ' << (cats.goal_flags()[i] ? 1 : 0) << '\n';
  }
  out << "complete " << (grid.complete() ? 1 : 0) << '\n';
  out << "cells\n";
  std::string line;
  for (int r = 0; r < grid.height(); ++r) {
    line.clear();
    for (int c = 0; c < grid.width(); ++c) {
      if (c) line.push_back(' ');
      const GridCell cell{r, c};
      if (!grid.explored(cell)) {
        line.push_back('-');
        continue;
      }
      line.push_back(grid.obstacle(cell) ? '#' : '.');
      if (const auto obj = grid.object(cell); obj != kNoCategory) line += std::to_string(obj);
    }
    out << line << '\n';
  }
}

SemanticGrid read_map(std::istream& in) {
  std::string magic;
  int version = 0;
  if (!(in >> magic >> version) || magic != "SEMGRID") throw ParseError("not a SEMGRID map file");
  if (version != kMapFormatVersion) {
    throw ParseError("unsupported map format version " + std::to_string(version));
  }
  const int width = parse_int<int>(expect_key(in, "width"));
  const int height = parse_int<int>(expect_key(in, "height"));
  const double resolution = parse_double(expect_key(in, "resolution"));
  const auto ncat = parse_int<std::size_t>(expect_key(in, "categories"));
  std::vector<std::string> names;
  std::vector<bool> goals;
  for (std::size_t i = 0; i < ncat; ++i) {
    std::string name;
    int flag = 0;
    if (!(in >> name >> flag) || (flag != 0 && flag != 1)) {
      throw ParseError("map header: bad category entry " + std::to_string(i));
    }
    names.push_back(name);
    goals.push_back(flag == 1);
  }
  const int complete_flag = parse_int<int>(expect_key(in, "complete"));
  std::string tag;
  if (!(in >> tag) || tag != "cells") throw ParseError("map header: missing 'cells'");

  SemanticGrid grid = [&] {
    try {
      return SemanticGrid(width, height, resolution, CategoryTable(names, goals));
    } catch (const std::invalid_argument& e) {
      throw ParseError(std::string("map header: ") + e.what());
    }
  }();
  std::string tok;
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      if (!(in >> tok) || tok.empty()) {
        throw ParseError("map body: truncated at cell (" + std::to_string(r) + "," +
                         std::to_string(c) + ")");
      }
      if (tok == "-") continue;
      if (tok[0] != '.' && tok[0] != '#') throw ParseError("map body: bad cell token '" + tok + "'");
      CategoryId obj = kNoCategory;
      if (tok.size() > 1) {
        obj = parse_int<CategoryId>(std::string_view(tok).substr(1));
        if (!grid.categories().contains(obj)) {
          throw ParseError("map body: unknown category id in '" + tok + "'");
        }
      }
      grid.set_cell({r, c}, tok[0] == '#', obj);
    }
  }
  if (in >> tok) throw ParseError("map body: trailing data");
  if ((complete_flag == 1) != grid.complete()) {
    throw ParseError("map header: complete flag disagrees with cell data");
  }
  return grid;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void save_map(const std::filesystem::path& path, const SemanticGrid& grid) {
  std::ostringstream os;
  write_map(os, grid);
  write_file_atomic(path, os.str());
}

SemanticGrid load_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open map file " + path.string());
  return read_map(in);
}

void write_potential_field(std::ostream& out, const PotentialField& field) {
  out << "POTFIELD " << kFieldFormatVersion << '\n';
  out << "width " << field.width() << '\n';
  out << "height " << field.height() << '\n';
  out << "values\n";
  const auto v = field.values();
  for (int r = 0; r < field.height(); ++r) {
    for (int c = 0; c < field.width(); ++c) {
      if (c) out << ' ';
      out << format_double(v[static_cast<std::size_t>(r) * field.width() + c]);
    }
    out << '\n';
  }
}

PotentialField read_potential_field(std::istream& in) {
  std::string magic;
  std::string version;
  if (!(in >> magic >> version) || magic != "POTFIELD") throw ParseError("not a potential field file");
  if (parse_int<int>(version) != kFieldFormatVersion) {
    throw ParseError("unsupported potential field version " + version);
  }
  const int width = parse_int<int>(expect_key(in, "width"));
  const int height = parse_int<int>(expect_key(in, "height"));
  if (width <= 0 || height <= 0 || width > (1 << 14) || height > (1 << 14)) {
    throw ParseError("bad potential field dimensions");
  }
  std::string tag;
  if (!(in >> tag) || tag != "values") throw ParseError("potential field: missing 'values'");
  std::vector<double> values(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  std::string tok;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(in >> tok)) throw ParseError("potential field: truncated after " + std::to_string(i) + " values");
    values[i] = parse_double(tok);
    if (!(values[i] >= 0.0 && values[i] <= 1.0)) throw ParseError("potential field: value " + tok + " outside [0, 1]");
  }
  if (in >> tok) throw ParseError("potential field: trailing data");
  return PotentialField(width, height, std::move(values));
}

void save_potential_field(const std::filesystem::path& path, const PotentialField& field) {
  std::ostringstream out;
  write_potential_field(out, field);
  write_file_atomic(path, out.str());
}

PotentialField load_potential_field(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_potential_field(in);
}

}  // namespace potnav
