#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace jflow {

/// Bad argument shape or range (index out of bounds, mismatched dimensions).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A form that must be positive definite is not, or a geometric invariant
/// of a setup fails. Carries the offending value and, when known, the grid
/// point where it was observed.
class GeometryError : public std::runtime_error {
 public:
  static constexpr std::ptrdiff_t kNoPoint = -1;

  GeometryError(const std::string& what, double value,
                std::ptrdiff_t point = kNoPoint)
      : std::runtime_error(what), value_(value), point_(point) {}

  double value() const noexcept { return value_; }
  std::ptrdiff_t point() const noexcept { return point_; }

 private:
  double value_;
  std::ptrdiff_t point_;
};

class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0, std::string field = {})
      : std::runtime_error(what), line_(line), field_(std::move(field)) {}
  int line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  int line_;
  std::string field_;
};

class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::size_t offset = 0)
      : std::runtime_error(what), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace jflow
