// Exception types shared across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace bicgql {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Operands of incompatible sizes (matrix/vector shape violations).
struct DimensionMismatch : Error {
  using Error::Error;
};

// Factorization hit a pivot below its singularity tolerance.
struct SingularMatrix : Error {
  using Error::Error;
};

// An estimator was asked for an iteration the trace cannot support yet
// (delay window reaches before iteration 0, or past the recorded history).
struct InsufficientHistory : Error {
  using Error::Error;
};

// A CG-style coefficient beta_k < 0 was passed where sqrt(beta_k) is needed.
struct NonPositiveBeta : Error {
  using Error::Error;
};

// Two-sided Lanczos inner product (z_k, w_k) vanished while neither vector
// did: the recursion cannot continue.
struct SeriousBreakdown : Error {
  using Error::Error;
};

// A Radau/Lobatto pivot changed sign: the supplied spectrum bounds lie
// inside the true spectrum, so the prescribed-node rules are invalid.
struct SpectrumViolation : Error {
  using Error::Error;
};

// A denominator underflowed in a quadrature-style estimate.
struct ZeroDenominator : Error {
  using Error::Error;
};

// A direction vector (or its Rayleigh quotient mu) underflowed.
struct ZeroDirection : Error {
  using Error::Error;
};

// A per-iteration benchmark sample whose reference quantity underflowed;
// such samples are excluded from averages and counted separately.
struct DegenerateCase : Error {
  using Error::Error;
};

// Malformed or unreadable input/output file.
struct IoError : Error {
  using Error::Error;
};

}  // namespace bicgql
