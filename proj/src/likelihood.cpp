#include "lifetail/likelihood.hpp"

#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "lifetail/errors.hpp"

namespace lifetail {

namespace {

constexpr double kInfD = std::numeric_limits<double>::infinity();

double pairwise_sum_range(const double* x, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_range(x, half) + pairwise_sum_range(x + half, n - half);
}

}  // namespace

double pairwise_sum(const std::vector<double>& x) {
  return pairwise_sum_range(x.data(), x.size());
}

double log_interval_prob(const ParamVector& p, double a, double b) {
  const double Ha = a <= 0.0 ? 0.0 : cum_hazard(p, a);
  if (Ha == kInfD) return -kInfD;
  const double Hb = cum_hazard(p, b);
  if (Hb <= Ha) return -kInfD;
  if (Hb == kInfD) return -Ha;
  return -Ha + std::log(-std::expm1(Ha - Hb));
}

namespace {

double record_loglik(const LifetimeRecord& r, const ParamVector& p,
                     const LoglikOptions& opts) {
  const double log_floor = std::log(opts.floor);
  double cens;
  switch (r.event) {
    case Event::observed:
      cens = log_density(p, r.time1);
      break;
    case Event::right_censored:
      cens = -cum_hazard(p, r.time1);
      break;
    case Event::left_censored:
      cens = log_interval_prob(p, 0.0, r.time2);
      break;
    case Event::interval_censored:
    default:
      cens = log_interval_prob(p, r.time1, r.time2);
      break;
  }
  if (!(cens > log_floor)) return -kInfD;

  double trunc = 0.0;
  if (r.truncated()) {
    const double lw1 = log_interval_prob(p, std::max(r.ltrunc1, 0.0), r.rtrunc1);
    if (r.has_second_window()) {
      const double lw2 = log_interval_prob(p, std::max(r.ltrunc2, 0.0), r.rtrunc2);
      const double hi = std::max(lw1, lw2);
      trunc = hi == -kInfD
                  ? -kInfD
                  : hi + std::log1p(std::exp(std::min(lw1, lw2) - hi));
    } else {
      trunc = lw1;
    }
    if (!(trunc > log_floor)) return -kInfD;
  }
  return r.weight * (cens - trunc);
}

}  // namespace

std::vector<double> loglik_contributions(const Dataset& d, const ParamVector& p,
                                         const LoglikOptions& opts) {
  validate(p);
  std::vector<double> c(d.records.size());
  const auto n = static_cast<std::ptrdiff_t>(d.records.size());
#pragma omp parallel for schedule(static) if (n > 256)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    c[static_cast<std::size_t>(i)] =
        record_loglik(d.records[static_cast<std::size_t>(i)], p, opts);
  return c;
}

double loglik(const Dataset& d, const ParamVector& p, const LoglikOptions& opts) {
  const auto c = loglik_contributions(d, p, opts);
  for (double v : c)
    if (!(v > -kInfD) || std::isnan(v)) return -kInfD;
  return pairwise_sum(c);
}

double loglik_serial(const Dataset& d, const ParamVector& p, const LoglikOptions& opts) {
  validate(p);
  std::vector<double> c(d.records.size());
  for (std::size_t i = 0; i < d.records.size(); ++i)
    c[i] = record_loglik(d.records[i], p, opts);
  for (double v : c)
    if (!(v > -kInfD) || std::isnan(v)) return -kInfD;
  return pairwise_sum(c);
}

double deviance(const Dataset& d, const ParamVector& p, const LoglikOptions& opts) {
  return -2.0 * loglik(d, p, opts);
}

}  // namespace lifetail
