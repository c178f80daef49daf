#pragma once

#include <vector>

#include "lifetail/data_model.hpp"
#include "lifetail/families.hpp"

namespace lifetail {

struct LoglikOptions {
  double floor = 1e-280;  // interval probabilities at or below this give -inf
};

/// log of Pr{a < T <= b} under p, computed on the cumulated-hazard scale.
double log_interval_prob(const ParamVector& p, double a, double b);

/// Per-record weighted log-likelihood contributions, in record order.
std::vector<double> loglik_contributions(const Dataset& d, const ParamVector& p,
                                         const LoglikOptions& opts = {});

/// Weighted log likelihood of an exceedance-transformed dataset. Returns
/// -inf when any record has zero likelihood under p. Record terms are
/// evaluated in parallel when OpenMP is enabled; the reduction uses a
/// fixed pairwise order so the result does not depend on thread count.
double loglik(const Dataset& d, const ParamVector& p, const LoglikOptions& opts = {});

/// Serial reference implementation of loglik, kept for testing.
double loglik_serial(const Dataset& d, const ParamVector& p,
                     const LoglikOptions& opts = {});

double deviance(const Dataset& d, const ParamVector& p, const LoglikOptions& opts = {});

/// Deterministic pairwise summation.
double pairwise_sum(const std::vector<double>& x);

}  // namespace lifetail
