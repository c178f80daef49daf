#pragma once

#include <stdexcept>
#include <string>

namespace lifetail {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Record validation
struct BoundsError : Error { using Error::Error; };
struct TruncationError : Error { using Error::Error; };
struct CodeError : Error { using Error::Error; };

// Ingestion
struct IoError : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct EmptyDatasetError : Error { using Error::Error; };

// Exceedance transform
struct AmbiguousExceedanceError : Error { using Error::Error; };

// Families / likelihood
struct DomainError : Error { using Error::Error; };
struct ConstraintError : Error { using Error::Error; };

// Fitting
struct NoExceedancesError : Error { using Error::Error; };
struct NonConvergenceError : Error { using Error::Error; };
struct SingularInformationError : Error { using Error::Error; };

// NPMLE
struct EmptyIntervalSetError : Error { using Error::Error; };
struct MaxIterError : Error { using Error::Error; };

// Inference
struct ForbiddenComparisonError : Error { using Error::Error; };
struct NotNestedError : Error { using Error::Error; };
struct OptimizationOrderError : Error { using Error::Error; };
struct EmptyStratumError : Error { using Error::Error; };
struct GridTooNarrowError : Error { using Error::Error; };
struct DegenerateTableError : Error { using Error::Error; };

// Sampling
struct ZeroMassError : Error { using Error::Error; };

// Plots
struct NoObservedFailuresError : Error { using Error::Error; };

}  // namespace lifetail
