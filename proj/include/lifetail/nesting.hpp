#pragma once

#include <functional>
#include <vector>

#include "lifetail/families.hpp"

namespace lifetail {

/// One nesting relation: `sub` is obtained from `super` by fixing
/// `interior` parameters at interior points and `boundary` parameters on
/// the boundary of the parameter space. The null distribution of the
/// deviance is the chi-bar-square mixture with binomial(boundary, 1/2)
/// weights over chi-square(interior) .. chi-square(interior + boundary).
/// allowed == false marks comparisons ruled out by a singular
/// information matrix (exponential versus the Makeham families).
struct NestingEdge {
  Family sub;
  Family super;
  int interior = 0;
  int boundary = 0;
  bool allowed = true;
  /// Maps sub-family estimates to a starting point in the super family.
  std::function<std::vector<double>(const std::vector<double>&)> embed;
};

const std::vector<NestingEdge>& nesting_edges();

/// Edge with the given endpoints, or nullptr when the pair is unrelated.
const NestingEdge* find_edge(Family sub, Family super);

/// Direct sub-families of f (edges used to seed multi-start fitting).
std::vector<const NestingEdge*> direct_subs(Family f);

/// Mixture weights over chi-square(df), df = interior .. interior +
/// boundary, for the edge's null distribution.
std::vector<double> chibar_weights(const NestingEdge& e);

/// Upper tail probability of the edge's chi-bar-square mixture.
double chibar_pvalue(const NestingEdge& e, double statistic);

}  // namespace lifetail
