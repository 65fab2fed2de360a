#pragma once

#include <stdexcept>

namespace lgr {

/// Linear algebra failed (non-SPD system, singular solve, ...).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input files or datasets could not be read or parsed.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace lgr
