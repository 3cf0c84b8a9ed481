#pragma once

#include <stdexcept>
#include <string>

namespace cnlu {

// Base class for all toolkit errors. Subclasses map to CLI exit codes:
// ConfigError -> 2 (usage), DataError/LabelError -> 3 (data/format),
// DimensionError/NumericError -> 4 (numeric failure).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape/axis mismatches, out-of-range indices, empty sequences.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid hyperparameters or flag combinations (even kernel, p >= 1, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// File / format / layout problems in datasets, vectors, checkpoints.
class DataError : public Error {
 public:
  using Error::Error;
};

// Unknown labels, malformed IOB tags, vocabulary ids out of range.
class LabelError : public Error {
 public:
  using Error::Error;
};

// NaN losses, divergence, failed numeric invariants.
class NumericError : public Error {
 public:
  using Error::Error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw Error(msg);
}

}  // namespace cnlu
