#pragma once

#include <stdexcept>
#include <string>

namespace nlshom {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid construction arguments or malformed configuration input.
struct ConfigError : Error {
  using Error::Error;
};

/// Two fields (or a field and an operator) live on different grids.
struct GridMismatchError : Error {
  using Error::Error;
};

/// A requested oscillation cannot be represented on the grid.
struct NyquistError : Error {
  using Error::Error;
};

/// Numerical breakdown during time evolution; names the offending step.
struct SolverFailure : Error {
  long step;
  SolverFailure(long step_, const std::string& what_)
      : Error(what_), step(step_) {}
};

}  // namespace nlshom
