#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace prefdens {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration values, unknown keys, mismatched bounds.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class DomainMismatchError : public Error {
 public:
  using Error::Error;
};

// Raised when a density has no mass anywhere (all entries -inf or zero).
class DegenerateDensityError : public Error {
 public:
  using Error::Error;
};

struct TrainingSnapshot {
  std::size_t step = 0;
  double loss = 0.0;
  double initial_loss = 0.0;
  double lr = 0.0;
  double grad_norm = 0.0;
  double param_norm = 0.0;
  std::string reason;
};

class TrainingAborted : public Error {
 public:
  explicit TrainingAborted(TrainingSnapshot snap);
  const TrainingSnapshot& snapshot() const noexcept { return snap_; }

 private:
  TrainingSnapshot snap_;
};

}  // namespace prefdens
