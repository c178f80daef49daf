#pragma once

#include <cstddef>
#include <vector>

#include "lifetail/data_model.hpp"

namespace lifetail {

/// One equivalence-class interval. open_left marks intervals whose mass
/// sits in (a, b]; it matters only for membership tests at tied bounds.
struct TurnbullInterval {
  double a = 0.0;
  double b = 0.0;
  bool open_left = false;
};

/// Maximal ordered disjoint intervals on which the nonparametric MLE can
/// place mass: a_1 <= b_1 < a_2 <= ... <= b_m, no candidate endpoint
/// strictly interior to any interval.
struct TurnbullIntervals {
  std::vector<TurnbullInterval> intervals;

  std::size_t size() const { return intervals.size(); }
};

/// Interval indices contained in one record's censoring set (alpha) and
/// truncation set (beta), stored as inclusive ranges. Records under
/// double truncation carry a second beta range.
struct MembershipRange {
  std::size_t alpha_lo = 0, alpha_hi = 0;
  std::size_t beta_lo = 0, beta_hi = 0;
  std::size_t beta2_lo = 1, beta2_hi = 0;  // empty unless second window

  bool has_beta2() const { return beta2_lo <= beta2_hi; }
};

/// Censoring sets are open on the left, (L, R]; exact failures are
/// closed singletons. Comparisons at tied bounds use a sqrt(machine
/// epsilon) tolerance. Throws EmptyIntervalSetError when a record's
/// censoring set contains no interval.
std::vector<MembershipRange> membership(const Dataset& d, const TurnbullIntervals& iv);

/// Builds the equivalence classes from the censoring bounds; under
/// truncation, right truncation bounds join the candidate left endpoints
/// and left truncation bounds join the candidate rights, which restores
/// consistency of the estimator for truncated data.
TurnbullIntervals turnbull_intervals(const Dataset& d);

enum class CdfConvention { left, right, interpolate };

/// Step distribution function: probability masses over the equivalence
/// classes. F is defined outside the intervals and completed inside them
/// by the chosen convention.
struct StepCDF {
  TurnbullIntervals intervals;
  std::vector<double> masses;
  CdfConvention convention = CdfConvention::right;
};

struct EmDiagnostics {
  int iterations = 0;
  double loglik = 0.0;
  bool converged = false;
  bool monotone = true;  // log likelihood nondecreasing across iterations
};

/// Self-consistency EM for the masses, with expected counts for both
/// censored intervals and individuals lost to truncation. Stops when
/// max |p_{s+1} - p_s| < tol; masses below 1e-12 are zeroed and the rest
/// renormalized. Every 100 iterations a doubled step is tried and kept
/// when it does not decrease the log likelihood. Throws MaxIterError
/// when maxit is hit and the optimality certificate fails.
StepCDF em_fit(const Dataset& d, const TurnbullIntervals& iv, double tol = 1e-9,
               int maxit = 100000, EmDiagnostics* diag = nullptr);

/// turnbull_intervals followed by em_fit.
StepCDF np_fit(const Dataset& d, double tol = 1e-9, int maxit = 100000,
               EmDiagnostics* diag = nullptr);

/// Log likelihood of a mass vector over the intervals: sum of
/// w_i {log P(A_i) - log P(B_i)}.
double np_loglik(const Dataset& d, const TurnbullIntervals& iv,
                 const std::vector<double>& masses);

/// Stationarity certificate. The likelihood is scale invariant in the
/// masses, so the simplex multiplier is zero: at an MLE the normalized
/// gradient vanishes on the support and is nonpositive off it.
struct KktReport {
  bool ok = true;
  double max_violation = 0.0;
  std::vector<std::size_t> violating;  // interval indices
};

KktReport kkt_check(const StepCDF& scdf, const Dataset& d, double tol = 1e-6);

/// F(t): 0 below the first interval, cumulative mass between intervals,
/// 1 above the last; inside an interval the convention decides.
double eval_cdf(const StepCDF& scdf, double t);
double eval_cdf(const StepCDF& scdf, double t, CdfConvention convention);

/// Generalized inverse of the interpolated step function: smallest t
/// with F(t) >= q under the interpolate convention.
double eval_quantile(const StepCDF& scdf, double q);

}  // namespace lifetail
