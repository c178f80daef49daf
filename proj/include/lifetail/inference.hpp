#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "lifetail/data_model.hpp"
#include "lifetail/families.hpp"
#include "lifetail/optim_fit.hpp"

namespace lifetail {

struct NestedTestResult {
  Family sub = Family::exp;
  Family super = Family::exp;
  double statistic = 0.0;
  int df0 = 0;                  // degrees of freedom of the first component
  std::vector<double> mixture;  // weights over chisq(df0), chisq(df0+1), ...
  double pvalue = 1.0;
  std::string method = "asymptotic";
};

/// Likelihood ratio test between two fits of nested families on the same
/// exceedances. Argument order is irrelevant; the sub model is the one
/// with the smaller log likelihood. The null distribution is the edge's
/// chi-bar-square mixture (plain chi-square for interior constraints).
/// Throws NotNestedError for unrelated or identical families,
/// ForbiddenComparisonError for comparisons with a singular information
/// matrix, and OptimizationOrderError when the super fit has a smaller
/// log likelihood than the sub fit by more than 1e-8.
NestedTestResult lrt_nested(const FitResult& a, const FitResult& b);

/// Likelihood ratio test of common parameters across strata: the null
/// fits one parameter vector to the pooled exceedances, the alternative
/// one per stratum. Regular interior hypothesis, so the reference
/// distribution is chi-square with (K-1) * n_params degrees of freedom.
NestedTestResult test_strata(const std::vector<Dataset>& strata, Family family,
                             const ExceedanceConfig& cfg,
                             const FitOptions& opts = {});

struct ThresholdEntry {
  double thresh = 0.0;
  bool ok = false;
  std::string message;  // failure reason when !ok
  // shape stability
  double shape = std::numeric_limits<double>::quiet_NaN();
  double lower = std::numeric_limits<double>::quiet_NaN();
  double upper = std::numeric_limits<double>::quiet_NaN();
  // score test
  double statistic = std::numeric_limits<double>::quiet_NaN();
  int df = 0;
  double pvalue = std::numeric_limits<double>::quiet_NaN();
};

struct ThresholdDiag {
  std::vector<ThresholdEntry> entries;
};

/// Shape stability: per threshold, a generalized Pareto fit to the
/// exceedances with a profile likelihood confidence interval for the
/// shape. Failed thresholds are marked, not fatal. Requires at least 10
/// units of retained weight per threshold.
ThresholdDiag tstab(const Dataset& d, const std::vector<double>& thresholds,
                    double level = 0.95, const FitOptions& opts = {});

/// Score tests of a common shape above each threshold u_k against a
/// piecewise generalized Pareto alternative with one shape per piece
/// u_k..u_K. Only the null (single shape) model is fitted; the score
/// statistic g' I^{-1} g uses finite-difference derivatives at the null
/// point and is referred to chi-square(K - k).
ThresholdDiag nc_score_test(const Dataset& d, const std::vector<double>& thresholds,
                            const FitOptions& opts = {});

struct ProfileCurve {
  std::vector<double> psi;     // candidate endpoints, on the age scale
  std::vector<double> loglik;  // profile log likelihood at each psi
  double psi_hat = 0.0;
  double loglik_hat = 0.0;
  double level = 0.95;
  double lower = 0.0;
  double upper = 0.0;
  bool lower_out_of_grid = false;
  bool upper_out_of_grid = false;
};

/// Profile log likelihood for the upper endpoint of a generalized Pareto
/// model above cfg.thresh. For each candidate endpoint psi the scale is
/// re-optimized under shape = -scale / (psi - thresh). Confidence bounds
/// solve 2 {l_p(psi) - l_p(psi_hat)} = -chisq_1(level); bounds that fall
/// outside the grid are reported at the grid edge with a flag, and the
/// upper bound is +inf when the shape estimate is nonnegative. Default
/// grid: 101 points on [0.9 psi_hat, 3 psi_hat]. Throws
/// GridTooNarrowError when the profile maximum sits on a grid edge.
ProfileCurve profile_endpoint(const Dataset& d, const ExceedanceConfig& cfg,
                              std::vector<double> psi_grid = {},
                              double level = 0.95, const FitOptions& opts = {});

enum class CiMethod { wald, profile };

struct HazardBandPoint {
  double t = 0.0;
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// Pointwise hazard confidence bands. Wald intervals use the delta
/// method on the log hazard scale; profile intervals reparametrize with
/// h(t) as the interest parameter by eliminating the leading scale
/// parameter, and invert the chi-square(1) likelihood ratio cutoff.
std::vector<HazardBandPoint> hazard_ci(const FitResult& fr, const Dataset& exc,
                                       const std::vector<double>& times,
                                       CiMethod method = CiMethod::wald,
                                       double level = 0.95);

struct ChisqGofResult {
  double statistic = 0.0;
  double pvalue = 1.0;
  std::size_t n_rows = 0;  // age bands after pooling
  std::size_t n_cols = 0;  // cohorts
  int n_replicates = 0;    // successful null simulations
  int n_failed = 0;
};

/// Chi-squared goodness of fit for aggregated cohort data: observed
/// counts per unit age band and cohort against expected counts from the
/// fitted family truncated at each cohort's bound, with bands at or
/// above pool_min pooled. The null distribution is simulated: each
/// replicate redraws cohort samples from the fitted model, refits the
/// family and recomputes the statistic; p-value is the rank of the
/// observed statistic among the B+1 values.
ChisqGofResult chisq_gof(const Dataset& exc, const FitResult& fr,
                         double pool_min = 5.0, int B = 999,
                         std::uint64_t seed = 1);

}  // namespace lifetail
