#pragma once

#include <stdexcept>
#include <string>

namespace potnav {

/// Operands disagree on width/height/resolution.
class ShapeError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class BoundsError : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

class ArgumentError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// No traversable route exists between the requested cells.
class NoPathError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid or unknown configuration entry; the message names the field.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class GenerationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed container file. `record()` is the failing record index, or -1
/// when the failure is in the file header.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, long long record = -1)
      : std::runtime_error(record < 0 ? what
                                      : "record " + std::to_string(record) + ": " + what),
        record_(record) {}
  long long record() const noexcept { return record_; }

private:
  long long record_;
};

}  // namespace potnav
