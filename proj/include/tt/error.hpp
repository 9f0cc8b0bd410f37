#ifndef TT_ERROR_HPP_
#define TT_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace tt {

// Base of every exception thrown by the library. Each module throws the most
// specific subclass so callers (notably the CLI) can map failures to
// diagnostics without string matching.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ContractError : public Error {
 public:
  using Error::Error;
};

// A forward value became NaN or infinite.
class NumericError : public Error {
 public:
  using Error::Error;
};

class SimulationError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

class HashMismatchError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

class ShapeMismatchError : public CheckpointError {
 public:
  using CheckpointError::CheckpointError;
};

}  // namespace tt

#endif  // TT_ERROR_HPP_
