#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hwml {

// Base of every error raised by the library. Callers that only need a
// message can catch this; the CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text. `line` is 1-based; 0 means "not line oriented".
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class InvalidGeometry : public Error {
 public:
  using Error::Error;
};

class ShapeMismatch : public Error {
 public:
  ShapeMismatch(std::string layer, const std::string& what)
      : Error("layer '" + layer + "': " + what), layer_(std::move(layer)) {}
  const std::string& layer() const noexcept { return layer_; }

 private:
  std::string layer_;
};

// Inconsistent configuration (unknown energy level, schema mismatch, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class InsufficientSamples : public Error {
 public:
  using Error::Error;
};

class KindMismatch : public Error {
 public:
  using Error::Error;
};

class RankDeficient : public Error {
 public:
  RankDeficient(std::vector<std::string> dims, const std::string& what)
      : Error(what), dims_(std::move(dims)) {}
  // Names of the dimensions that the design cannot identify.
  const std::vector<std::string>& dimensions() const noexcept { return dims_; }

 private:
  std::vector<std::string> dims_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace hwml
