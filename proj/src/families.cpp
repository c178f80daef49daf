#include "lifetail/families.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lifetail/errors.hpp"

namespace lifetail {

namespace {

constexpr double kInfD = std::numeric_limits<double>::infinity();
constexpr double kTinyParam = 1e-12;  // below this, use the limiting branch

const std::vector<FamilyInfo>& catalogue() {
  static const std::vector<FamilyInfo> info = {
      {Family::exp, "exp", {{"scale", ParamKind::positive}}},
      {Family::gomp, "gomp", {{"scale", ParamKind::positive}, {"shape", ParamKind::positive}}},
      {Family::gp, "gp", {{"scale", ParamKind::positive}, {"shape", ParamKind::shape}}},
      {Family::weibull,
       "weibull",
       {{"scale", ParamKind::positive}, {"shape", ParamKind::positive}}},
      {Family::extgp,
       "extgp",
       {{"scale", ParamKind::positive},
        {"beta", ParamKind::positive},
        {"shape", ParamKind::shape}}},
      {Family::extweibull,
       "extweibull",
       {{"scale", ParamKind::positive},
        {"alpha", ParamKind::positive},
        {"shape", ParamKind::shape}}},
      {Family::perks, "perks", {{"alpha", ParamKind::positive}, {"nu", ParamKind::nonneg}}},
      {Family::beard,
       "beard",
       {{"alpha", ParamKind::positive},
        {"nu", ParamKind::nonneg},
        {"beta", ParamKind::nonneg}}},
      {Family::gompmake,
       "gompmake",
       {{"scale", ParamKind::positive},
        {"shape", ParamKind::positive},
        {"lambda", ParamKind::nonneg}}},
      {Family::perksmake,
       "perksmake",
       {{"alpha", ParamKind::positive},
        {"nu", ParamKind::nonneg},
        {"lambda", ParamKind::nonneg}}},
      {Family::beardmake,
       "beardmake",
       {{"alpha", ParamKind::positive},
        {"nu", ParamKind::nonneg},
        {"beta", ParamKind::nonneg},
        {"lambda", ParamKind::nonneg}}},
      {Family::gppiece, "gppiece", {}},
  };
  return info;
}

bool satisfies(double v, ParamKind k) {
  if (!std::isfinite(v)) return false;
  switch (k) {
    case ParamKind::positive: return v > 0.0;
    case ParamKind::nonneg: return v >= 0.0;
    case ParamKind::shape: return true;
    case ParamKind::real: return true;
  }
  return false;
}

// Generalized Pareto pieces shared by several families.
double gp_cumhaz(double sigma, double xi, double s) {
  if (std::abs(xi) < kTinyParam) return s / sigma;
  const double z = xi * s / sigma;
  if (z <= -1.0) return kInfD;
  return std::log1p(z) / xi;
}

double gp_hazard(double sigma, double xi, double s) {
  const double den = sigma + xi * s;
  if (den <= 0.0) return kInfD;
  return 1.0 / den;
}

}  // namespace

const FamilyInfo& family_info(Family f) {
  return catalogue()[static_cast<std::size_t>(f)];
}

const std::string& family_name(Family f) { return family_info(f).name; }

Family family_from_string(const std::string& name) {
  for (const auto& fi : catalogue())
    if (fi.name == name) return fi.family;
  throw CodeError("unknown family '" + name + "'");
}

const std::vector<Family>& all_families() {
  static const std::vector<Family> fams = [] {
    std::vector<Family> v;
    for (const auto& fi : catalogue()) v.push_back(fi.family);
    return v;
  }();
  return fams;
}

std::vector<double> gppiece_stage_scales(const ParamVector& p) {
  const std::size_t K = p.thresholds.size();
  std::vector<double> scales(K);
  scales[0] = p.values[0];
  for (std::size_t k = 1; k < K; ++k)
    scales[k] =
        scales[k - 1] + p.values[k] * (p.thresholds[k] - p.thresholds[k - 1]);
  return scales;
}

ParamVector gppiece_params(double scale, const std::vector<double>& shapes,
                           const std::vector<double>& thresholds) {
  if (shapes.empty() || shapes.size() != thresholds.size())
    throw ConstraintError("gppiece needs one shape per threshold");
  ParamVector p;
  p.family = Family::gppiece;
  p.values.push_back(scale);
  p.values.insert(p.values.end(), shapes.begin(), shapes.end());
  p.thresholds = thresholds;
  validate(p);
  return p;
}

void validate(const ParamVector& p) {
  if (p.family == Family::gppiece) {
    const std::size_t K = p.thresholds.size();
    if (K == 0 || p.values.size() != K + 1)
      throw ConstraintError("gppiece needs K thresholds and K+1 values");
    if (!std::is_sorted(p.thresholds.begin(), p.thresholds.end()) ||
        std::adjacent_find(p.thresholds.begin(), p.thresholds.end()) !=
            p.thresholds.end())
      throw ConstraintError("gppiece thresholds must be strictly increasing");
    if (!(p.values[0] > 0.0)) throw ConstraintError("gppiece scale must be positive");
    for (double s : gppiece_stage_scales(p))
      if (!(s > 0.0)) throw ConstraintError("implied gppiece stage scale is not positive");
    return;
  }
  const auto& fi = family_info(p.family);
  if (p.values.size() != fi.params.size())
    throw ConstraintError("wrong parameter count for " + fi.name);
  for (std::size_t i = 0; i < fi.params.size(); ++i)
    if (!satisfies(p.values[i], fi.params[i].kind))
      throw ConstraintError("parameter " + fi.params[i].name + " of " + fi.name +
                            " violates its constraint");
}

bool is_valid(const ParamVector& p) {
  try {
    validate(p);
  } catch (const ConstraintError&) {
    return false;
  }
  return true;
}

namespace {

struct GppieceLocate {
  std::size_t piece;
  double offset;      // time inside the piece
  double head_cumhaz; // cumulated hazard up to the piece start
};

GppieceLocate gppiece_locate(const ParamVector& p, double t) {
  const auto scales = gppiece_stage_scales(p);
  const std::size_t K = p.thresholds.size();
  double head = 0.0;
  std::size_t k = 0;
  while (k + 1 < K && t >= p.thresholds[k + 1]) {
    head += gp_cumhaz(scales[k], p.values[k + 1],
                      p.thresholds[k + 1] - p.thresholds[k]);
    ++k;
  }
  return {k, t - p.thresholds[k], head};
}

double raw_hazard(const ParamVector& p, double t) {
  const auto& v = p.values;
  switch (p.family) {
    case Family::exp:
      return 1.0 / v[0];
    case Family::gomp:
      return std::exp(v[1] * t / v[0]) / v[0];
    case Family::gp:
      return gp_hazard(v[0], v[1], t);
    case Family::weibull:
      return v[1] / v[0] * std::pow(t / v[0], v[1] - 1.0);
    case Family::extgp: {
      const double sigma = v[0], beta = v[1], xi = v[2];
      const double e = std::expm1(beta * t / sigma);
      const double den = beta + xi * e;
      if (den <= 0.0) return kInfD;
      return beta / sigma * (e + 1.0) / den;
    }
    case Family::extweibull: {
      const double sigma = v[0], alpha = v[1], xi = v[2];
      const double z = std::pow(t / sigma, alpha);
      const double den = 1.0 + xi * z;
      if (den <= 0.0) return kInfD;
      return alpha / sigma * std::pow(t / sigma, alpha - 1.0) / den;
    }
    case Family::perks: {
      const double a = v[0] * std::exp(v[1] * t);
      return a / (1.0 + a);
    }
    case Family::beard: {
      const double e = std::exp(v[1] * t);
      return v[0] * e / (1.0 + v[0] * v[2] * e);
    }
    case Family::gompmake: {
      ParamVector sub{Family::gomp, {v[0], v[1]}, {}};
      return v[2] + raw_hazard(sub, t);
    }
    case Family::perksmake: {
      ParamVector sub{Family::perks, {v[0], v[1]}, {}};
      return v[2] + raw_hazard(sub, t);
    }
    case Family::beardmake: {
      ParamVector sub{Family::beard, {v[0], v[1], v[2]}, {}};
      return v[3] + raw_hazard(sub, t);
    }
    case Family::gppiece: {
      if (t < p.thresholds.front()) return 0.0;
      const auto loc = gppiece_locate(p, t);
      return gp_hazard(gppiece_stage_scales(p)[loc.piece], v[loc.piece + 1],
                       loc.offset);
    }
  }
  return kInfD;
}

double raw_cum_hazard(const ParamVector& p, double t) {
  const auto& v = p.values;
  switch (p.family) {
    case Family::exp:
      return t / v[0];
    case Family::gomp:
      return std::expm1(v[1] * t / v[0]) / v[1];
    case Family::gp:
      return gp_cumhaz(v[0], v[1], t);
    case Family::weibull:
      return std::pow(t / v[0], v[1]);
    case Family::extgp: {
      const double sigma = v[0], beta = v[1], xi = v[2];
      const double e = std::expm1(beta * t / sigma);
      if (std::abs(xi) < kTinyParam) return e / beta;
      const double z = xi / beta * e;
      if (z <= -1.0) return kInfD;
      return std::log1p(z) / xi;
    }
    case Family::extweibull: {
      const double sigma = v[0], alpha = v[1], xi = v[2];
      const double z = std::pow(t / sigma, alpha);
      if (std::abs(xi) < kTinyParam) return z;
      if (xi * z <= -1.0) return kInfD;
      return std::log1p(xi * z) / xi;
    }
    case Family::perks: {
      const double alpha = v[0], nu = v[1];
      if (nu < kTinyParam) return alpha * t / (1.0 + alpha);
      return std::log1p(alpha * std::expm1(nu * t) / (1.0 + alpha)) / nu;
    }
    case Family::beard: {
      const double alpha = v[0], nu = v[1], beta = v[2];
      if (nu < kTinyParam) return alpha * t / (1.0 + alpha * beta);
      if (beta < kTinyParam) return alpha / nu * std::expm1(nu * t);
      return std::log1p(alpha * beta * std::expm1(nu * t) / (1.0 + alpha * beta)) /
             (nu * beta);
    }
    case Family::gompmake: {
      ParamVector sub{Family::gomp, {v[0], v[1]}, {}};
      return v[2] * t + raw_cum_hazard(sub, t);
    }
    case Family::perksmake: {
      ParamVector sub{Family::perks, {v[0], v[1]}, {}};
      return v[2] * t + raw_cum_hazard(sub, t);
    }
    case Family::beardmake: {
      ParamVector sub{Family::beard, {v[0], v[1], v[2]}, {}};
      return v[3] * t + raw_cum_hazard(sub, t);
    }
    case Family::gppiece: {
      if (t <= p.thresholds.front()) return 0.0;
      const auto loc = gppiece_locate(p, t);
      return loc.head_cumhaz + gp_cumhaz(gppiece_stage_scales(p)[loc.piece],
                                         v[loc.piece + 1], loc.offset);
    }
  }
  return kInfD;
}

void check_domain(const ParamVector& p, double t) {
  validate(p);
  if (std::isnan(t) || t < 0.0) throw DomainError("negative time");
}

}  // namespace

double hazard(const ParamVector& p, double t) {
  check_domain(p, t);
  return raw_hazard(p, t);
}

double cum_hazard(const ParamVector& p, double t) {
  check_domain(p, t);
  if (t == kInfD) return kInfD;
  return raw_cum_hazard(p, t);
}

double survival(const ParamVector& p, double t) { return std::exp(-cum_hazard(p, t)); }

double cdf(const ParamVector& p, double t) { return -std::expm1(-cum_hazard(p, t)); }

double density(const ParamVector& p, double t) {
  check_domain(p, t);
  const double H = raw_cum_hazard(p, t);
  if (H == kInfD) return 0.0;
  return raw_hazard(p, t) * std::exp(-H);
}

double log_density(const ParamVector& p, double t) {
  check_domain(p, t);
  const double H = raw_cum_hazard(p, t);
  if (H == kInfD) return -kInfD;
  return std::log(raw_hazard(p, t)) - H;
}

double endpoint(const ParamVector& p) {
  validate(p);
  const auto& v = p.values;
  switch (p.family) {
    case Family::gp:
      return v[1] < 0.0 ? -v[0] / v[1] : kInfD;
    case Family::extgp:
      return v[2] < 0.0 ? v[0] / v[1] * std::log1p(-v[1] / v[2]) : kInfD;
    case Family::extweibull:
      return v[2] < 0.0 ? v[0] * std::pow(-1.0 / v[2], 1.0 / v[1]) : kInfD;
    case Family::gppiece: {
      const double xi = v.back();
      if (xi >= 0.0) return kInfD;
      return p.thresholds.back() - gppiece_stage_scales(p).back() / xi;
    }
    default:
      return kInfD;
  }
}

namespace {

// Invert H(t) = target for families without a closed-form quantile.
// The cumulated hazard is continuous and strictly increasing on the
// support, so bracketed bisection with a Newton polish converges.
double invert_cum_hazard(const ParamVector& p, double target) {
  const double upper = endpoint(p);
  double lo = 0.0;
  double hi = std::isfinite(upper) ? upper : 1.0;
  if (!std::isfinite(upper)) {
    while (raw_cum_hazard(p, hi) < target) {
      hi *= 2.0;
      if (hi > 1e300) return kInfD;
    }
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double H = raw_cum_hazard(p, mid);
    (H < target ? lo : hi) = mid;
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) break;
  }
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 4; ++it) {  // Newton polish inside the bracket
    const double h = raw_hazard(p, t);
    if (!std::isfinite(h) || h <= 0.0) break;
    const double step = (raw_cum_hazard(p, t) - target) / h;
    const double nt = t - step;
    if (nt <= lo || nt >= hi) break;
    t = nt;
  }
  return t;
}

}  // namespace

double quantile(const ParamVector& p, double q) {
  validate(p);
  if (!(q >= 0.0 && q < 1.0)) throw DomainError("quantile level outside [0, 1)");
  const double v = -std::log1p(-q);  // target cumulated hazard
  const auto& par = p.values;
  switch (p.family) {
    case Family::exp:
      return par[0] * v;
    case Family::gomp:
      return par[0] / par[1] * std::log1p(par[1] * v);
    case Family::gp: {
      const double sigma = par[0], xi = par[1];
      if (std::abs(xi) < kTinyParam) return sigma * v;
      return sigma / xi * std::expm1(xi * v);
    }
    case Family::weibull:
      return par[0] * std::pow(v, 1.0 / par[1]);
    case Family::extgp: {
      const double sigma = par[0], beta = par[1], xi = par[2];
      const double inner = std::abs(xi) < kTinyParam ? beta * v : beta / xi * std::expm1(xi * v);
      return sigma / beta * std::log1p(inner);
    }
    case Family::extweibull: {
      const double sigma = par[0], alpha = par[1], xi = par[2];
      const double z = std::abs(xi) < kTinyParam ? v : std::expm1(xi * v) / xi;
      return sigma * std::pow(z, 1.0 / alpha);
    }
    case Family::perks: {
      const double alpha = par[0], nu = par[1];
      if (nu < kTinyParam) return v * (1.0 + alpha) / alpha;
      return std::log1p((1.0 + alpha) * std::expm1(nu * v) / alpha) / nu;
    }
    case Family::beard: {
      const double alpha = par[0], nu = par[1], beta = par[2];
      if (nu < kTinyParam) return v * (1.0 + alpha * beta) / alpha;
      if (beta < kTinyParam) return std::log1p(nu * v / alpha) / nu;
      return std::log1p((1.0 + alpha * beta) * std::expm1(nu * beta * v) /
                        (alpha * beta)) /
             nu;
    }
    case Family::gppiece: {
      const auto scales = gppiece_stage_scales(p);
      const std::size_t K = p.thresholds.size();
      double head = 0.0;
      for (std::size_t k = 0; k < K; ++k) {
        const double piece_len =
            k + 1 < K ? p.thresholds[k + 1] - p.thresholds[k] : kInfD;
        const double piece_haz =
            k + 1 < K ? gp_cumhaz(scales[k], p.values[k + 1], piece_len) : kInfD;
        if (v <= head + piece_haz || k + 1 == K) {
          const double rest = v - head;
          const double xi = p.values[k + 1];
          const double s = std::abs(xi) < kTinyParam
                               ? scales[k] * rest
                               : scales[k] / xi * std::expm1(xi * rest);
          return p.thresholds[k] + s;
        }
        head += piece_haz;
      }
      return kInfD;
    }
    default:
      return invert_cum_hazard(p, v);
  }
}

}  // namespace lifetail
