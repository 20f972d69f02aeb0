#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "potnav/grid_map.hpp"
#include "potnav/potentials.hpp"

namespace potnav {

inline constexpr int kMapFormatVersion = 1;
inline constexpr int kFieldFormatVersion = 1;

/// Text map container, see docs/formats.md. read_map(write_map(g)) == g.
void write_map(std::ostream& out, const SemanticGrid& grid);
SemanticGrid read_map(std::istream& in);

void save_map(const std::filesystem::path& path, const SemanticGrid& grid);
SemanticGrid load_map(const std::filesystem::path& path);

/// Text potential-field container ("POTFIELD 1"); values round-trip exactly.
void write_potential_field(std::ostream& out, const PotentialField& field);
/// Throws ParseError on malformed input or values outside [0, 1].
PotentialField read_potential_field(std::istream& in);
void save_potential_field(const std::filesystem::path& path, const PotentialField& field);
PotentialField load_potential_field(const std::filesystem::path& path);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
/// Throws ParseError unless the whole token is a valid double.
double parse_double(std::string_view token);

/// Writes `contents` to `path` via a temporary sibling file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace potnav
