#pragma once

#include <stdexcept>
#include <string>

namespace hktlab {

/// Invalid input (bad file, violated precondition, out-of-range config).
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A numerical contract failed (route disagreement, kernel ambiguity, ...).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace tol {
// Library-wide default tolerances.
inline constexpr double kHermSymmetry = 1e-10;   // hyper-Hermitian symmetry
inline constexpr double kPositivity = 1e-10;     // relaxed eigenvalue floor
inline constexpr double kInvariance = 1e-10;     // SU(2)-invariant part check
inline constexpr double kRouteMatch = 1e-9;      // independent-route agreement
}  // namespace tol

}  // namespace hktlab
