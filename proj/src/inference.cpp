#include "lifetail/inference.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <map>

#include "lifetail/errors.hpp"
#include "lifetail/likelihood.hpp"
#include "lifetail/nesting.hpp"
#include "lifetail/optim.hpp"
#include "lifetail/sampling.hpp"

namespace lifetail {

namespace {

constexpr double kInfD = std::numeric_limits<double>::infinity();

double chisq_tail(int df, double x) {
  if (df == 0) return x > 0.0 ? 0.0 : 1.0;
  if (!(x > 0.0)) return 1.0;
  boost::math::chi_squared dist(df);
  return boost::math::cdf(boost::math::complement(dist, x));
}

double chisq_quantile(int df, double level) {
  boost::math::chi_squared dist(df);
  return boost::math::quantile(dist, level);
}

/// Profile log likelihood of a generalized Pareto shape: scale
/// re-optimized on the log scale around sigma_guess.
double profile_shape_ll(const Dataset& exc, double xi, double sigma_guess) {
  auto nll = [&](double ls) {
    ParamVector p{Family::gp, {std::exp(ls), xi}, {}};
    if (!is_valid(p)) return kInfD;
    const double ll = loglik(exc, p);
    return std::isfinite(ll) ? -ll : kInfD;
  };
  const double c = std::log(std::max(sigma_guess, 1e-8));
  double fmin = kInfD;
  brent_minimize(nll, c - 8.0, c + 8.0, 1e-10, &fmin);
  return -fmin;
}

/// Inner maximization of the endpoint profile: shape tied to the scale
/// by shape = -scale / eta, scale in (0, eta).
double profile_endpoint_ll(const Dataset& exc, double eta, double sigma_guess) {
  if (!(eta > 0.0)) return -kInfD;
  auto nll = [&](double ls) {
    const double sigma = std::exp(ls);
    if (!(sigma < eta)) return kInfD;
    ParamVector p{Family::gp, {sigma, -sigma / eta}, {}};
    if (!is_valid(p)) return kInfD;
    const double ll = loglik(exc, p);
    return std::isfinite(ll) ? -ll : kInfD;
  };
  const double hi = std::log(eta * (1.0 - 1e-10));
  const double c = std::min(std::log(std::max(sigma_guess, 1e-8)), hi - 1e-3);
  double fmin = kInfD;
  brent_minimize(nll, c - 10.0, hi, 1e-10, &fmin);
  return std::isfinite(fmin) ? -fmin : -kInfD;
}

}  // namespace

NestedTestResult lrt_nested(const FitResult& a, const FitResult& b) {
  if (a.family == b.family)
    throw NotNestedError("identical families are not a nested pair");
  const NestingEdge* e = find_edge(a.family, b.family);
  const FitResult* sub = &a;
  const FitResult* super = &b;
  if (!e) {
    e = find_edge(b.family, a.family);
    sub = &b;
    super = &a;
  }
  if (!e)
    throw NotNestedError("no nesting relation between " + family_name(a.family) +
                         " and " + family_name(b.family));
  if (!e->allowed)
    throw ForbiddenComparisonError(
        family_name(e->sub) + " versus " + family_name(e->super) +
        " is not testable: the information matrix is singular because the "
        "constant hazard offset is not identifiable at the null");
  if (std::abs(a.thresh - b.thresh) > 1e-9 ||
      std::abs(a.n_exceedances - b.n_exceedances) > 1e-9)
    throw DomainError("fits compare different datasets or thresholds");
  if (super->loglik < sub->loglik - 1e-8)
    throw OptimizationOrderError(
        "the larger family has a smaller log likelihood; refit before testing");

  NestedTestResult res;
  res.sub = e->sub;
  res.super = e->super;
  res.statistic = std::max(2.0 * (super->loglik - sub->loglik), 0.0);
  res.df0 = e->interior;
  res.mixture = chibar_weights(*e);
  res.pvalue = chibar_pvalue(*e, res.statistic);
  return res;
}

NestedTestResult test_strata(const std::vector<Dataset>& strata, Family family,
                             const ExceedanceConfig& cfg, const FitOptions& opts) {
  if (strata.size() < 2) throw DomainError("need at least two strata");
  FitOptions fo = opts;
  fo.compute_se = false;

  Dataset pooled;
  double sum_ll = 0.0;
  for (std::size_t k = 0; k < strata.size(); ++k) {
    try {
      sum_ll += fit(strata[k], family, cfg, {}, fo).loglik;
    } catch (const NoExceedancesError&) {
      throw EmptyStratumError("stratum " + std::to_string(k + 1) +
                              " has no exceedances");
    }
    pooled.records.insert(pooled.records.end(), strata[k].records.begin(),
                          strata[k].records.end());
  }
  const double ll_pool = fit(pooled, family, cfg, {}, fo).loglik;

  NestedTestResult res;
  res.sub = res.super = family;
  res.statistic = std::max(2.0 * (sum_ll - ll_pool), 0.0);
  res.df0 = static_cast<int>((strata.size() - 1) * family_info(family).params.size());
  res.mixture = {1.0};
  res.pvalue = chisq_tail(res.df0, res.statistic);
  res.method = "asymptotic";
  return res;
}

namespace {

/// Locate where the profile crosses `target` between a point above and a
/// point below, by bisection on the continuous profile.
double cross_profile(const std::function<double(double)>& prof, double x_above,
                     double x_below, double target) {
  double lo = x_above, hi = x_below;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    (prof(mid) >= target ? lo : hi) = mid;
    if (std::abs(hi - lo) < 1e-8 * (1.0 + std::abs(mid))) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

ThresholdDiag tstab(const Dataset& d, const std::vector<double>& thresholds,
                    double level, const FitOptions& opts) {
  ThresholdDiag diag;
  const double half_cut = 0.5 * chisq_quantile(1, level);
  for (double u : thresholds) {
    ThresholdEntry ent;
    ent.thresh = u;
    try {
      const Dataset exc = to_exceedances(d, {u});
      if (exc.total_weight() < 10.0)
        throw NoExceedancesError("fewer than 10 units of weight above threshold");
      FitOptions fo = opts;
      fo.compute_se = false;
      const auto fr = fit_exceedances(exc, Family::gp, u, {}, fo);
      const double sigma = fr.estimates[0], xi = fr.estimates[1];
      ent.shape = xi;
      const double target = fr.loglik - half_cut;
      auto prof = [&](double x) { return profile_shape_ll(exc, x, sigma); };

      double x = xi;
      double step = 0.05 * (1.0 + std::abs(xi));
      ent.lower = -1.0;
      while (x - step > -1.0 + 1e-6) {
        x -= step;
        step *= 2.0;
        if (prof(x) < target) {
          ent.lower = cross_profile(prof, std::min(x + step / 2.0, xi), x, target);
          break;
        }
      }
      x = xi;
      step = 0.05 * (1.0 + std::abs(xi));
      ent.upper = kInfD;
      while (x < xi + 20.0) {
        x += step;
        step *= 2.0;
        if (prof(x) < target) {
          ent.upper = cross_profile(prof, std::max(x - step / 2.0, xi), x, target);
          break;
        }
      }
      ent.ok = true;
    } catch (const Error& e) {
      ent.message = e.what();
    }
    diag.entries.push_back(ent);
  }
  return diag;
}

ThresholdDiag nc_score_test(const Dataset& d, const std::vector<double>& thresholds,
                            const FitOptions& opts) {
  if (thresholds.size() < 2) throw DomainError("need at least two thresholds");
  if (!std::is_sorted(thresholds.begin(), thresholds.end()) ||
      std::adjacent_find(thresholds.begin(), thresholds.end()) != thresholds.end())
    throw DomainError("thresholds must be strictly increasing");

  ThresholdDiag diag;
  const std::size_t K = thresholds.size();
  for (std::size_t i = 0; i + 1 < K; ++i) {
    ThresholdEntry ent;
    ent.thresh = thresholds[i];
    ent.df = static_cast<int>(K - 1 - i);
    try {
      const Dataset exc = to_exceedances(d, {thresholds[i]});
      FitOptions fo = opts;
      fo.compute_se = false;
      const auto fr = fit_exceedances(exc, Family::gp, thresholds[i], {}, fo);
      ent.shape = fr.estimates[1];

      std::vector<double> tau;
      for (std::size_t k = i; k < K; ++k) tau.push_back(thresholds[k] - thresholds[i]);
      std::vector<double> theta0;
      theta0.push_back(fr.estimates[0]);
      theta0.insert(theta0.end(), tau.size(), fr.estimates[1]);

      auto ll_fn = [&](const std::vector<double>& x) {
        ParamVector p;
        p.family = Family::gppiece;
        p.values = x;
        p.thresholds = tau;
        if (!is_valid(p)) return -kInfD;
        return loglik(exc, p);
      };
      const auto g = fd_gradient(ll_fn, theta0, 1e-5);
      const auto H = fd_hessian(ll_fn, theta0, 1e-5);

      const auto m = static_cast<Eigen::Index>(theta0.size());
      Eigen::MatrixXd info(m, m);
      Eigen::VectorXd gv(m);
      for (Eigen::Index r = 0; r < m; ++r) {
        gv(r) = g[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < m; ++c)
          info(r, c) = -H[static_cast<std::size_t>(r * m + c)];
      }
      if (!info.allFinite() || !gv.allFinite())
        throw SingularInformationError("non-finite score or information");
      Eigen::LLT<Eigen::MatrixXd> llt(info);
      if (llt.info() != Eigen::Success)
        throw SingularInformationError("information matrix not positive definite");
      ent.statistic = std::max(gv.dot(llt.solve(gv)), 0.0);
      ent.pvalue = chisq_tail(ent.df, ent.statistic);
      ent.ok = true;
    } catch (const Error& e) {
      ent.message = e.what();
    }
    diag.entries.push_back(ent);
  }
  return diag;
}

ProfileCurve profile_endpoint(const Dataset& d, const ExceedanceConfig& cfg,
                              std::vector<double> psi_grid, double level,
                              const FitOptions& opts) {
  const Dataset exc = to_exceedances(d, cfg);
  FitOptions fo = opts;
  fo.compute_se = false;
  const auto fr = fit_exceedances(exc, Family::gp, cfg.thresh, {}, fo);
  const double sigma = fr.estimates[0], xi = fr.estimates[1];
  const bool finite_end = xi < 0.0;
  const double psi_hat = finite_end ? cfg.thresh - sigma / xi : kInfD;

  if (psi_grid.empty()) {
    if (!finite_end)
      throw DomainError(
          "nonnegative shape estimate: supply an explicit endpoint grid");
    for (int i = 0; i < 101; ++i)
      psi_grid.push_back(psi_hat * (0.9 + 2.1 * i / 100.0));
  }
  std::sort(psi_grid.begin(), psi_grid.end());

  ProfileCurve out;
  out.level = level;
  out.psi_hat = psi_hat;
  out.loglik_hat = fr.loglik;
  auto prof = [&](double psi) {
    return profile_endpoint_ll(exc, psi - cfg.thresh, sigma);
  };
  for (double psi : psi_grid) {
    out.psi.push_back(psi);
    out.loglik.push_back(prof(psi));
  }
  if (finite_end && (psi_hat <= psi_grid.front() || psi_hat >= psi_grid.back()))
    throw GridTooNarrowError("profile maximum lies at or beyond the grid edge");

  const double target = fr.loglik - 0.5 * chisq_quantile(1, level);
  const std::size_t n = psi_grid.size();

  out.lower = psi_grid.front();
  out.lower_out_of_grid = true;
  for (std::size_t j = 0; j + 1 < n && psi_grid[j] < psi_hat; ++j) {
    if (out.loglik[j] < target && out.loglik[j + 1] >= target) {
      out.lower = cross_profile(prof, psi_grid[j + 1], psi_grid[j], target);
      out.lower_out_of_grid = false;
      break;
    }
  }
  if (out.loglik.front() >= target) {
    out.lower = psi_grid.front();
    out.lower_out_of_grid = true;
  }

  if (!finite_end) {
    out.upper = kInfD;
    out.upper_out_of_grid = false;
  } else {
    out.upper = psi_grid.back();
    out.upper_out_of_grid = true;
    for (std::size_t j = n - 1; j > 0 && psi_grid[j - 1] > psi_hat * 0.999999; --j) {
      if (out.loglik[j] < target && out.loglik[j - 1] >= target) {
        out.upper = cross_profile(prof, psi_grid[j - 1], psi_grid[j], target);
        out.upper_out_of_grid = false;
        break;
      }
    }
    if (out.upper_out_of_grid && out.loglik.back() < target) {
      // the drop happens inside the first interval past psi_hat
      for (std::size_t j = 0; j + 1 < n; ++j) {
        if (psi_grid[j] >= psi_hat && out.loglik[j] >= target &&
            out.loglik[j + 1] < target) {
          out.upper = cross_profile(prof, psi_grid[j], psi_grid[j + 1], target);
          out.upper_out_of_grid = false;
          break;
        }
      }
    }
  }
  return out;
}

namespace {

double eval_hazard(const FitResult& fr, const std::vector<double>& values, double t) {
  ParamVector p = fr.estimates;
  p.values = values;
  if (!is_valid(p)) return std::numeric_limits<double>::quiet_NaN();
  return hazard(p, t);
}

/// Solve hazard(t; v0, rest) = h for the leading scale-type parameter,
/// which is monotone in the hazard for every catalogue family.
double solve_leading_param(const FitResult& fr, std::vector<double> values, double t,
                           double h) {
  double lo = -30.0, hi = 30.0;
  auto at = [&](double lv) {
    values[0] = std::exp(lv);
    return eval_hazard(fr, values, t);
  };
  const bool increasing = at(hi) > at(lo);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double hm = at(mid);
    const bool go_up = std::isnan(hm) ? true : ((hm < h) == increasing);
    (go_up ? lo : hi) = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

double shape_kind_to_unc(double v, ParamKind k) {
  switch (k) {
    case ParamKind::positive:
    case ParamKind::nonneg:
      return std::log(std::max(v, 1e-10));
    case ParamKind::shape:
      return std::log1p(std::max(v, -1.0 + 1e-10));
    case ParamKind::real:
      return v;
  }
  return v;
}

double shape_kind_to_con(double x, ParamKind k) {
  switch (k) {
    case ParamKind::positive:
    case ParamKind::nonneg:
      return std::exp(x);
    case ParamKind::shape:
      return std::expm1(x);
    case ParamKind::real:
      return x;
  }
  return x;
}

/// Profile log likelihood with the hazard at time t pinned to h: the
/// leading parameter is eliminated, the rest re-optimized.
double profile_hazard_ll(const FitResult& fr, const Dataset& exc, double t, double h) {
  const auto& specs = family_info(fr.family).params;
  const std::size_t n = specs.size();

  auto ll_at = [&](const std::vector<double>& rest) {
    std::vector<double> values = fr.estimates.values;
    for (std::size_t i = 1; i < n; ++i) values[i] = rest[i - 1];
    values[0] = solve_leading_param(fr, values, t, h);
    ParamVector p = fr.estimates;
    p.values = values;
    if (!is_valid(p)) return -kInfD;
    if (std::abs(hazard(p, t) - h) > 1e-6 * (1.0 + h)) return -kInfD;
    return loglik(exc, p);
  };

  if (n == 1) return ll_at({});
  std::vector<double> x0;
  for (std::size_t i = 1; i < n; ++i)
    x0.push_back(shape_kind_to_unc(fr.estimates.values[i], specs[i].kind));
  auto obj = [&](const std::vector<double>& x) {
    std::vector<double> rest(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      rest[i] = shape_kind_to_con(x[i], specs[i + 1].kind);
    const double ll = ll_at(rest);
    return std::isfinite(ll) ? -ll : kInfD;
  };
  const auto res = nelder_mead(obj, x0);
  return std::isfinite(res.fmin) ? -res.fmin : -kInfD;
}

}  // namespace

std::vector<HazardBandPoint> hazard_ci(const FitResult& fr, const Dataset& exc,
                                       const std::vector<double>& times,
                                       CiMethod method, double level) {
  std::vector<HazardBandPoint> out;
  if (method == CiMethod::wald) {
    const auto cov = covariance(fr, exc);
    const std::size_t n = fr.estimates.values.size();
    boost::math::normal norm;
    const double z = boost::math::quantile(norm, 0.5 * (1.0 + level));
    for (double t : times) {
      HazardBandPoint pt;
      pt.t = t;
      pt.estimate = hazard(fr.estimates, t);
      std::vector<double> grad(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        if (fr.boundary[i]) continue;
        const double h = 1e-5 * (1.0 + std::abs(fr.estimates.values[i]));
        auto v = fr.estimates.values;
        v[i] += h;
        const double up = eval_hazard(fr, v, t);
        v[i] -= 2.0 * h;
        const double dn = eval_hazard(fr, v, t);
        grad[i] = (up - dn) / (2.0 * h);
      }
      double var = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) var += grad[i] * cov[i * n + j] * grad[j];
      if (!(var >= 0.0) || !std::isfinite(var))
        throw SingularInformationError("hazard variance is not finite");
      const double se_log = std::sqrt(var) / pt.estimate;
      pt.lower = pt.estimate * std::exp(-z * se_log);
      pt.upper = pt.estimate * std::exp(z * se_log);
      out.push_back(pt);
    }
    return out;
  }

  const double target = fr.loglik - 0.5 * chisq_quantile(1, level);
  for (double t : times) {
    HazardBandPoint pt;
    pt.t = t;
    pt.estimate = hazard(fr.estimates, t);
    auto prof = [&](double lh) {
      return profile_hazard_ll(fr, exc, t, std::exp(lh));
    };
    const double lh_hat = std::log(pt.estimate);

    double step = 0.05;
    double x = lh_hat;
    pt.lower = 0.0;
    while (x > lh_hat - 20.0) {
      x -= step;
      step *= 2.0;
      if (prof(x) < target) {
        pt.lower = std::exp(cross_profile(prof, std::min(x + step / 2.0, lh_hat), x,
                                          target));
        break;
      }
    }
    step = 0.05;
    x = lh_hat;
    pt.upper = kInfD;
    while (x < lh_hat + 20.0) {
      x += step;
      step *= 2.0;
      if (prof(x) < target) {
        pt.upper = std::exp(cross_profile(prof, std::max(x - step / 2.0, lh_hat), x,
                                          target));
        break;
      }
    }
    out.push_back(pt);
  }
  return out;
}

namespace {

struct GofTable {
  std::vector<double> cohort_bounds;   // right truncation per cohort
  std::vector<double> cohort_totals;   // weight per cohort
  std::size_t n_rows = 0;              // unit bands 0..n_rows-2, pooled last
  double pool_min = 5.0;
  // counts[col * n_rows + row]
  std::vector<double> counts;
};

double gof_statistic(const GofTable& tab, const ParamVector& p) {
  double stat = 0.0;
  for (std::size_t c = 0; c < tab.cohort_bounds.size(); ++c) {
    const double rt = tab.cohort_bounds[c];
    const double denom = cdf(p, rt);
    if (!(denom > 0.0)) return kInfD;
    for (std::size_t r = 0; r < tab.n_rows; ++r) {
      double pr;
      if (r + 1 == tab.n_rows) {
        pr = std::max(denom - cdf(p, std::min(tab.pool_min, rt)), 0.0) / denom;
      } else {
        const double a = std::min(static_cast<double>(r), rt);
        const double b = std::min(static_cast<double>(r) + 1.0, rt);
        pr = std::max(cdf(p, b) - cdf(p, a), 0.0) / denom;
      }
      const double e = tab.cohort_totals[c] * pr;
      const double o = tab.counts[c * tab.n_rows + r];
      if (e > 0.0)
        stat += (o - e) * (o - e) / e;
      else if (o > 0.0)
        return kInfD;
    }
  }
  return stat;
}

std::size_t band_row(double y, double pool_min, std::size_t n_rows) {
  if (y >= pool_min) return n_rows - 1;
  const double b = std::floor(y);
  return static_cast<std::size_t>(std::max(b, 0.0));
}

}  // namespace

ChisqGofResult chisq_gof(const Dataset& exc, const FitResult& fr, double pool_min,
                         int B, std::uint64_t seed) {
  GofTable tab;
  tab.pool_min = pool_min;
  tab.n_rows = static_cast<std::size_t>(std::ceil(pool_min)) + 1;

  std::map<double, std::size_t> cohort_of;
  for (const auto& r : exc.records) {
    if (!(r.rtrunc1 < kInf))
      throw DomainError("contingency test needs a right truncation bound per record");
    cohort_of.emplace(r.rtrunc1, 0);
  }
  std::size_t ci = 0;
  for (auto& [rt, idx] : cohort_of) {
    idx = ci++;
    tab.cohort_bounds.push_back(rt);
  }
  tab.cohort_totals.assign(ci, 0.0);
  tab.counts.assign(ci * tab.n_rows, 0.0);
  for (const auto& r : exc.records) {
    const std::size_t c = cohort_of[r.rtrunc1];
    tab.cohort_totals[c] += r.weight;
    tab.counts[c * tab.n_rows + band_row(r.time1, pool_min, tab.n_rows)] += r.weight;
  }
  for (std::size_t c = 0; c < ci; ++c)
    if (!(tab.cohort_totals[c] > 0.0))
      throw DegenerateTableError("cohort " + std::to_string(c + 1) + " is empty");

  ChisqGofResult res;
  res.n_rows = tab.n_rows;
  res.n_cols = ci;
  res.statistic = gof_statistic(tab, fr.estimates);

  FitOptions fo;
  fo.compute_se = false;
  fo.n_jitter = 2;

  std::vector<double> stats(static_cast<std::size_t>(B),
                            std::numeric_limits<double>::quiet_NaN());
#pragma omp parallel for schedule(dynamic)
  for (int b = 0; b < B; ++b) {
    try {
      RngStream rng(seed, static_cast<std::uint64_t>(b) + 1);
      GofTable sim = tab;
      std::fill(sim.counts.begin(), sim.counts.end(), 0.0);
      Dataset boot;
      for (std::size_t c = 0; c < ci; ++c) {
        const double rt = tab.cohort_bounds[c];
        const double denom = cdf(fr.estimates, rt);
        const auto n = static_cast<std::size_t>(std::llround(tab.cohort_totals[c]));
        std::map<std::size_t, double> rows;
        for (std::size_t i = 0; i < n; ++i) {
          const double x = quantile(fr.estimates,
                                    std::min(rng.uniform() * denom, 1.0 - 1e-16));
          rows[band_row(x, pool_min, tab.n_rows)] += 1.0;
        }
        sim.cohort_totals[c] = static_cast<double>(n);
        for (const auto& [row, cnt] : rows) {
          sim.counts[c * tab.n_rows + row] = cnt;
          LifetimeRecord rec;
          rec.time1 = static_cast<double>(row);
          rec.time2 = row + 1 == tab.n_rows ? rt
                                            : std::min(static_cast<double>(row) + 1.0, rt);
          rec.event = Event::interval_censored;
          rec.rtrunc1 = rt;
          rec.weight = cnt;
          boot.records.push_back(rec);
        }
      }
      const auto refit = fit_exceedances(boot, fr.family, fr.thresh, {}, fo);
      stats[static_cast<std::size_t>(b)] = gof_statistic(sim, refit.estimates);
    } catch (const Error&) {
      // failed replicate dropped below
    }
  }
  std::size_t n_ge = 0, n_ok = 0;
  for (double s : stats) {
    if (std::isnan(s)) {
      ++res.n_failed;
      continue;
    }
    ++n_ok;
    if (s >= res.statistic) ++n_ge;
  }
  res.n_replicates = static_cast<int>(n_ok);
  res.pvalue = static_cast<double>(n_ge + 1) / static_cast<double>(n_ok + 1);
  return res;
}

}  // namespace lifetail
