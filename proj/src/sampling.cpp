#include "lifetail/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "lifetail/errors.hpp"
#include "lifetail/likelihood.hpp"
#include "lifetail/optim_fit.hpp"

namespace lifetail {

namespace {

std::uint64_t splitmix64(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d649fb794658ebULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) {
  // key the stream off (seed, stream) so streams are independent
  std::uint64_t s = seed;
  std::uint64_t k1 = splitmix64(s);
  s = stream ^ 0xda3e39cb94b95bdbULL;
  std::uint64_t k2 = splitmix64(s);
  state_ = k1 ^ (k2 + 0x9e3779b97f4a7c15ULL);
}

std::uint64_t RngStream::next_u64() { return splitmix64(state_); }

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

SamplingScheme SamplingScheme::ltrt(double lo, double hi) {
  SamplingScheme s;
  s.kind = SamplingKind::ltrt;
  s.lower = {lo};
  s.upper = {hi};
  return s;
}

SamplingScheme SamplingScheme::ltrc(double lo, double cap) {
  SamplingScheme s;
  s.kind = SamplingKind::ltrc;
  s.lower = {lo};
  s.upper = {cap};
  return s;
}

namespace {

double recycled(const std::vector<double>& v, std::size_t i, double fallback) {
  if (v.empty()) return fallback;
  return v[v.size() == 1 ? 0 : i];
}

/// Inversion draw from p truncated to (a, b): F^{-1}[F(a) + U {F(b) - F(a)}].
double truncated_draw(const ParamVector& p, double a, double b, double u) {
  const double fa = a <= 0.0 ? 0.0 : cdf(p, a);
  const double fb = b == kInf ? 1.0 : cdf(p, b);
  const double mass = fb - fa;
  if (!(mass > 1e-12)) throw ZeroMassError("truncation window has negligible mass");
  const double q = std::min(fa + u * mass, 1.0 - 1e-16);
  return quantile(p, q);
}

}  // namespace

Dataset sample_elife(std::size_t n, const ParamVector& p, const SamplingScheme& scheme,
                     std::uint64_t seed, std::uint64_t stream) {
  validate(p);
  RngStream rng(seed, stream);
  Dataset d;
  d.records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = std::max(recycled(scheme.lower, i, 0.0), 0.0);
    const double hi = recycled(scheme.upper, i, kInf);
    if (lo > hi) throw DomainError("sampling bounds out of order");
    LifetimeRecord r;
    switch (scheme.kind) {
      case SamplingKind::none:
        r.time1 = r.time2 = quantile(p, std::min(rng.uniform(), 1.0 - 1e-16));
        break;
      case SamplingKind::ltrt:
        r.time1 = r.time2 = truncated_draw(p, lo, hi, rng.uniform());
        r.ltrunc1 = lo;
        r.rtrunc1 = hi;
        break;
      case SamplingKind::ltrc: {
        const double x = truncated_draw(p, lo, kInf, rng.uniform());
        r.ltrunc1 = lo;
        if (x > hi) {
          r.time1 = hi;
          r.time2 = kInf;
          r.event = Event::right_censored;
        } else {
          r.time1 = r.time2 = x;
        }
        break;
      }
      case SamplingKind::ditrunc: {
        const double lo2 = recycled(scheme.lower2, i, kInf);
        const double hi2 = recycled(scheme.upper2, i, kInf);
        if (!(hi < lo2 && lo2 <= hi2))
          throw DomainError("double truncation windows must be disjoint and ordered");
        const double fa1 = lo <= 0.0 ? 0.0 : cdf(p, lo);
        const double m1 = (hi == kInf ? 1.0 : cdf(p, hi)) - fa1;
        const double fa2 = cdf(p, lo2);
        const double m2 = (hi2 == kInf ? 1.0 : cdf(p, hi2)) - fa2;
        if (!(m1 + m2 > 1e-12)) throw ZeroMassError("truncation windows have negligible mass");
        // single-uniform inversion over the union of the two windows
        const double c = rng.uniform() * (m1 + m2);
        const double q = c <= m1 ? fa1 + c : fa2 + (c - m1);
        r.time1 = r.time2 = quantile(p, std::min(q, 1.0 - 1e-16));
        r.ltrunc1 = lo;
        r.rtrunc1 = hi;
        r.ltrunc2 = lo2;
        r.rtrunc2 = hi2;
        break;
      }
    }
    d.records.push_back(r);
  }
  return d;
}

std::vector<CohortTemplate> cohort_template(const Dataset& exc) {
  std::map<double, double> totals;
  for (const auto& r : exc.records) totals[r.rtrunc1] += r.weight;
  std::vector<CohortTemplate> out;
  for (const auto& [rt, w] : totals) out.push_back({rt, w});
  return out;
}

namespace {

double replicate_statistic(const std::vector<CohortTemplate>& cohorts,
                           const ParamVector& null_params, Family null_family,
                           Family alt_family, const BootstrapLrtOptions& opts,
                           std::uint64_t seed, std::uint64_t stream) {
  RngStream rng(seed, stream);
  Dataset boot;
  for (const auto& c : cohorts) {
    const auto n = static_cast<std::size_t>(std::llround(c.count));
    if (opts.granularity > 0.0) {
      std::map<double, double> counts;  // age band -> count
      for (std::size_t i = 0; i < n; ++i) {
        const double x = truncated_draw(null_params, 0.0, c.rtrunc, rng.uniform());
        counts[std::floor(x / opts.granularity) * opts.granularity] += 1.0;
      }
      for (const auto& [band, cnt] : counts) {
        LifetimeRecord r;
        r.time1 = band;
        r.time2 = std::min(band + opts.granularity, c.rtrunc);
        r.event = r.time1 == r.time2 ? Event::observed : Event::interval_censored;
        r.rtrunc1 = c.rtrunc;
        r.weight = cnt;
        boot.records.push_back(r);
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        LifetimeRecord r;
        r.time1 = r.time2 = truncated_draw(null_params, 0.0, c.rtrunc, rng.uniform());
        r.rtrunc1 = c.rtrunc;
        boot.records.push_back(r);
      }
    }
  }
  FitOptions fo;
  fo.compute_se = false;
  fo.n_jitter = opts.n_jitter;
  const auto f0 = fit_exceedances(boot, null_family, 0.0, {}, fo);
  const auto f1 = fit_exceedances(boot, alt_family, 0.0, {}, fo);
  return std::max(2.0 * (f1.loglik - f0.loglik), 0.0);
}

}  // namespace

BootstrapLrtResult bootstrap_lrt(const Dataset& exc, Family null_family,
                                 Family alt_family, int B, std::uint64_t seed,
                                 const BootstrapLrtOptions& opts) {
  if (B < 99) throw DomainError("bootstrap needs B >= 99");
  FitOptions fo;
  fo.compute_se = false;
  const auto f0 = fit_exceedances(exc, null_family, 0.0, {}, fo);
  const auto f1 = fit_exceedances(exc, alt_family, 0.0, {}, fo);
  const auto cohorts = cohort_template(exc);

  BootstrapLrtResult res;
  res.observed = std::max(2.0 * (f1.loglik - f0.loglik), 0.0);

  std::vector<double> stats(static_cast<std::size_t>(B),
                            std::numeric_limits<double>::quiet_NaN());
#pragma omp parallel for schedule(dynamic)
  for (int b = 0; b < B; ++b) {
    try {
      stats[static_cast<std::size_t>(b)] =
          replicate_statistic(cohorts, f0.estimates, null_family, alt_family, opts,
                              seed, static_cast<std::uint64_t>(b) + 1);
    } catch (const Error&) {
      // replicate marked failed below
    }
  }
  for (double s : stats) {
    if (std::isnan(s)) ++res.n_failed;
    else res.replicates.push_back(s);
  }
  res.failure_warning = res.n_failed > B / 100;

  std::size_t n_ge = 0;
  for (double s : res.replicates)
    if (s >= res.observed) ++n_ge;
  res.pvalue = static_cast<double>(n_ge + 1) / static_cast<double>(res.replicates.size() + 1);
  return res;
}

}  // namespace lifetail
