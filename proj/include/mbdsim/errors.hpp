#pragma once

#include <stdexcept>
#include <string>

namespace mbdsim {

/// A value handed to a library operation is outside its documented domain.
class InvalidInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Measurement time runs backwards relative to filter state.
class TemporalOrderError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Registry binding invariant violated; signals a simulation bug, not an attack.
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed persisted data (trace records, scenario files, configs).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid run configuration, rejected before any simulation starts.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mbdsim
