#pragma once

#include <stdexcept>
#include <string>

namespace exq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A quantity needed more derivatives than the jets carrying it hold.
class DegreeError : public Error {
 public:
  using Error::Error;
};

/// Division by a vanishing constant term, or an elementary function
/// evaluated outside its domain.
class SingularFieldError : public Error {
 public:
  using Error::Error;
};

/// Malformed expression text. `offset` is a byte offset into the input.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Geometric preconditions violated: non-positive-definite metric, degenerate
/// immersion, wrong rank or dimension.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// An umbilic-only formula was applied to an embedding with L̊ != 0.
class NonUmbilicError : public GeometryError {
 public:
  NonUmbilicError(const std::string& what, double max_abs)
      : GeometryError(what), max_abs_(max_abs) {}
  double max_abs() const { return max_abs_; }

 private:
  double max_abs_;
};

/// Invalid scenario or run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace exq
