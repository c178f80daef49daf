#pragma once

#include <string>
#include <vector>

namespace lifetail {

enum class Family {
  exp,
  gomp,
  gp,
  weibull,
  extgp,
  extweibull,
  perks,
  beard,
  gompmake,
  perksmake,
  beardmake,
  gppiece
};

/// Constraint on one parameter of a family.
enum class ParamKind {
  positive,   // > 0, open
  nonneg,     // >= 0, closed; boundary solutions are meaningful
  shape,      // real; restricted to > -1 at fitting time
  real
};

struct ParamSpec {
  std::string name;
  ParamKind kind;
};

struct FamilyInfo {
  Family family;
  std::string name;
  std::vector<ParamSpec> params;  // fixed-arity families only
};

const FamilyInfo& family_info(Family f);
Family family_from_string(const std::string& name);
const std::string& family_name(Family f);
const std::vector<Family>& all_families();

/// Parameter values for one family. For gppiece the values are
/// (scale1, shape1..shapeK) and `thresholds` holds u_1 < ... < u_K.
struct ParamVector {
  Family family = Family::exp;
  std::vector<double> values;
  std::vector<double> thresholds;

  double operator[](std::size_t i) const { return values[i]; }
  std::size_t n_params() const { return values.size(); }
};

/// Throws ConstraintError when p violates the family constraints.
void validate(const ParamVector& p);
bool is_valid(const ParamVector& p);

// Distributional functions. All take t >= 0 (DomainError otherwise) and
// a valid parameter vector (ConstraintError otherwise). Beyond a finite
// endpoint, hazard and cum_hazard return +inf.
double hazard(const ParamVector& p, double t);
double cum_hazard(const ParamVector& p, double t);
double survival(const ParamVector& p, double t);
double cdf(const ParamVector& p, double t);
double density(const ParamVector& p, double t);
double log_density(const ParamVector& p, double t);

/// Inverse of cdf on [0, 1); DomainError outside.
double quantile(const ParamVector& p, double q);

/// Upper endpoint of the support, +inf when the tail is unbounded.
double endpoint(const ParamVector& p);

/// Build a piecewise generalized Pareto parameter vector with continuity
/// constraints: stage scales follow sigma_{k+1} = sigma_k + shape_k *
/// (u_{k+1} - u_k) and must all stay positive.
ParamVector gppiece_params(double scale, const std::vector<double>& shapes,
                           const std::vector<double>& thresholds);

/// Stage scales implied by a gppiece parameter vector.
std::vector<double> gppiece_stage_scales(const ParamVector& p);

}  // namespace lifetail
