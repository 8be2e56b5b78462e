#pragma once

#include <stdexcept>

namespace ppt {

// Malformed arguments: dimension mismatches, non-finite inputs, bad ranges.
struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Rotation matrix fails orthonormality/determinant checks.
struct InvalidRotation : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Least-squares fit has fewer samples than unknowns.
struct IllPosedFit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Factorization or solve failed beyond jitter repair.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Simulation state became non-finite; the episode counts as a failure.
struct SimulationDiverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace ppt
