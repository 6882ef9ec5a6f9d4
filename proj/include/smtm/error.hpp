#pragma once

#include <stdexcept>
#include <string>

namespace smtm {

/// Malformed or inconsistent input data (corpus, seed file, vectors, checkpoint).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration: hyperparameters out of range, bad option values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The sampler state violated one of its own invariants (NaN weight,
/// meaningfully negative count). Indicates a bug, not bad input.
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace smtm
