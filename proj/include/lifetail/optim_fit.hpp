#pragma once

#include <optional>
#include <vector>

#include "lifetail/data_model.hpp"
#include "lifetail/families.hpp"

namespace lifetail {

struct FitResult {
  Family family = Family::exp;
  double thresh = 0.0;
  ParamVector estimates;
  std::vector<std::optional<double>> se;  // absent on the boundary or when
                                          // the information matrix is singular
  double loglik = 0.0;
  double n_exceedances = 0.0;  // total retained weight
  bool converged = false;
  int n_starts = 0;
  std::vector<bool> boundary;  // per-parameter boundary flags
};

struct FitOptions {
  int n_jitter = 5;          // extra multiplicative +-20% perturbed starts
  unsigned jitter_seed = 12345;
  double boundary_tol = 1e-6;
  bool compute_se = true;
};

/// Constrained maximum likelihood fit of `family` to the exceedances of
/// d above cfg.thresh. Runs a multi-start search: a moment-style start,
/// fits of every nested sub-family embedded as starting values, any
/// user-supplied starts, and jittered copies; the best optimum wins.
/// Boundary solutions of >=0 parameters are polished to exactly zero and
/// flagged.
FitResult fit(const Dataset& d, Family family, const ExceedanceConfig& cfg,
              const std::vector<ParamVector>& starts = {},
              const FitOptions& opts = {});

/// As fit(), but on an already exceedance-transformed dataset.
FitResult fit_exceedances(const Dataset& exc, Family family, double thresh = 0.0,
                          const std::vector<ParamVector>& starts = {},
                          const FitOptions& opts = {});

/// Standard errors from the inverse observed information (central
/// finite-difference Hessian, symmetrized). Boundary parameters are
/// excluded. Throws SingularInformationError when the information matrix
/// is not positive definite.
std::vector<std::optional<double>> standard_errors(const FitResult& fr,
                                                   const Dataset& exc);

/// Full covariance matrix of the estimates, row-major n x n; rows and
/// columns of boundary parameters are zero. Same failure modes as
/// standard_errors.
std::vector<double> covariance(const FitResult& fr, const Dataset& exc);

}  // namespace lifetail
