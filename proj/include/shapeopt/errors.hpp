#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shapeopt {

// Bad user input: config values, sizes below operator minima, unsupported options.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Untagged edges, non-conforming interfaces, bad partners.
class TopologyError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class ConstraintRankError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mesh with J <= threshold somewhere. The line search treats it as J = +inf.
class FoldedMeshError : public std::runtime_error {
 public:
  FoldedMeshError(const std::string& what, std::size_t index)
      : std::runtime_error(what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

class UnsupportedSourceError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Divergence, non-convergent power iteration, time-grid mismatch.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace shapeopt
