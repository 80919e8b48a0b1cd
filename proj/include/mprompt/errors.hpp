#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mprompt {

// Base of every error the library throws; carries the field path that was
// being validated (may be empty).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, std::string field = {})
      : std::runtime_error(what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Array extents disagree (frame counts, track counts, image sizes).
class ShapeError : public Error {
  using Error::Error;
};

// A count, size or region argument is out of its allowed range.
class RangeError : public Error {
  using Error::Error;
};

// More tracks requested than embedding ids available.
class CapacityError : public Error {
  using Error::Error;
};

// Geometry has no well-defined answer (zero-radius orbit, antipodal drag).
class DegenerateError : public Error {
  using Error::Error;
};

// A value violates a domain invariant (non-orthonormal rotation, bad depth).
class InvariantError : public Error {
  using Error::Error;
};

// A metric was asked for over an empty support.
class UndefinedMetricError : public Error {
  using Error::Error;
};

// Malformed serialized input. `offset` is the byte offset for binary formats
// and -1 for text formats.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::string field, std::int64_t offset = -1)
      : Error(format(what, field, offset), std::move(field)), offset_(offset) {}

  std::int64_t offset() const noexcept { return offset_; }

 private:
  static std::string format(const std::string& what, const std::string& field,
                            std::int64_t offset) {
    std::string msg = what;
    if (!field.empty()) msg += " (field '" + field + "'";
    if (offset >= 0) msg += (field.empty() ? " (" : ", ") + std::string("offset ") + std::to_string(offset);
    if (!field.empty() || offset >= 0) msg += ")";
    return msg;
  }

  std::int64_t offset_;
};

}  // namespace mprompt
