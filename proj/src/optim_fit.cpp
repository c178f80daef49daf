#include "lifetail/optim_fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "lifetail/errors.hpp"
#include "lifetail/likelihood.hpp"
#include "lifetail/nesting.hpp"
#include "lifetail/optim.hpp"

namespace lifetail {

namespace {

constexpr double kInfD = std::numeric_limits<double>::infinity();

std::vector<ParamKind> param_kinds(Family f) {
  std::vector<ParamKind> kinds;
  for (const auto& ps : family_info(f).params) kinds.push_back(ps.kind);
  return kinds;
}

double to_unconstrained(double theta, ParamKind k) {
  switch (k) {
    case ParamKind::positive:
    case ParamKind::nonneg:
      return std::log(std::max(theta, 1e-8));
    case ParamKind::shape:
      return std::log1p(std::max(theta, -1.0 + 1e-10));
    case ParamKind::real:
      return theta;
  }
  return theta;
}

double to_constrained(double x, ParamKind k) {
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

/// Weighted representative time, used only to seed the optimizer.
double moment_time(const Dataset& exc) {
  double num = 0.0, den = 0.0;
  for (const auto& r : exc.records) {
    double t;
    switch (r.event) {
      case Event::observed: t = r.time1; break;
      case Event::right_censored: t = 1.5 * r.time1; break;
      case Event::left_censored: t = 0.5 * r.time2; break;
      default: t = 0.5 * (r.time1 + r.time2); break;
    }
    if (!std::isfinite(t)) t = r.time1;
    num += r.weight * t;
    den += r.weight;
  }
  const double m = den > 0.0 ? num / den : 1.0;
  return m > 1e-8 ? m : 1.0;
}

std::vector<double> moment_start(Family f, double m) {
  const double alpha = m > 1.1 ? 1.0 / (m - 1.0) : 1.0;
  switch (f) {
    case Family::exp: return {m};
    case Family::gomp: return {m, 0.5};
    case Family::gp: return {m, 0.1};
    case Family::weibull: return {m, 1.5};
    case Family::extgp: return {m, 0.5, 0.1};
    case Family::extweibull: return {m, 1.5, 0.1};
    case Family::perks: return {alpha, 0.1};
    case Family::beard: return {alpha, 0.1, 1.0};
    case Family::gompmake: return {m, 0.5, 1e-3};
    case Family::perksmake: return {alpha, 0.1, 1e-3};
    case Family::beardmake: return {alpha, 0.1, 1.0, 1e-3};
    default:
      throw DomainError("no closed parameter count for this family");
  }
}

struct Candidate {
  std::vector<double> values;
  double loglik = -kInfD;
  bool converged = false;
};

/// Maximize the log likelihood over the non-pinned parameters.
Candidate optimize_from(const Dataset& exc, Family f,
                        const std::vector<ParamKind>& kinds,
                        const std::vector<double>& start,
                        const std::vector<bool>& pinned) {
  const std::size_t n = kinds.size();
  std::vector<std::size_t> free_idx;
  for (std::size_t i = 0; i < n; ++i)
    if (!pinned[i]) free_idx.push_back(i);

  std::vector<double> full = start;
  auto objective = [&](const std::vector<double>& x) {
    for (std::size_t j = 0; j < free_idx.size(); ++j)
      full[free_idx[j]] = to_constrained(x[j], kinds[free_idx[j]]);
    ParamVector p{f, full, {}};
    if (!is_valid(p)) return kInfD;
    const double ll = loglik(exc, p);
    return std::isfinite(ll) ? -ll : kInfD;
  };

  if (free_idx.empty()) {
    ParamVector p{f, full, {}};
    return {full, is_valid(p) ? loglik(exc, p) : -kInfD, true};
  }

  std::vector<double> x0(free_idx.size());
  for (std::size_t j = 0; j < free_idx.size(); ++j)
    x0[j] = to_unconstrained(start[free_idx[j]], kinds[free_idx[j]]);

  auto res = nelder_mead(objective, x0);
  Candidate c;
  c.values = start;
  for (std::size_t j = 0; j < free_idx.size(); ++j)
    c.values[free_idx[j]] = to_constrained(res.x[j], kinds[free_idx[j]]);
  c.loglik = std::isfinite(res.fmin) ? -res.fmin : -kInfD;
  c.converged = res.converged && std::isfinite(res.fmin);
  return c;
}

FitResult fit_impl(const Dataset& exc, Family family, double thresh,
                   const std::vector<ParamVector>& user_starts,
                   const FitOptions& opts, std::map<Family, FitResult>& memo);

/// Fits every registered sub-family and embeds its optimum as a start.
std::vector<std::vector<double>> nested_starts(const Dataset& exc, Family family,
                                               double thresh, const FitOptions& opts,
                                               std::map<Family, FitResult>& memo) {
  std::vector<std::vector<double>> starts;
  for (const auto* e : direct_subs(family)) {
    try {
      auto it = memo.find(e->sub);
      if (it == memo.end()) {
        FitOptions sub_opts = opts;
        sub_opts.compute_se = false;
        it = memo.emplace(e->sub, fit_impl(exc, e->sub, thresh, {}, sub_opts, memo))
                 .first;
      }
      starts.push_back(e->embed(it->second.estimates.values));
    } catch (const Error&) {
      // a failed sub-fit just forfeits its starting value
    }
  }
  return starts;
}

FitResult fit_impl(const Dataset& exc, Family family, double thresh,
                   const std::vector<ParamVector>& user_starts,
                   const FitOptions& opts, std::map<Family, FitResult>& memo) {
  if (family == Family::gppiece)
    throw DomainError("gppiece has no free-form fit; use the score test machinery");
  const auto kinds = param_kinds(family);
  const std::size_t n = kinds.size();

  std::vector<std::vector<double>> starts;
  const double m = moment_time(exc);
  starts.push_back(moment_start(family, m));
  for (auto s : nested_starts(exc, family, thresh, opts, memo)) starts.push_back(s);
  for (const auto& p : user_starts) {
    if (p.family != family || p.values.size() != n)
      throw ConstraintError("user start does not match the family");
    starts.push_back(p.values);
  }
  std::mt19937 rng(opts.jitter_seed);
  std::uniform_real_distribution<double> unif(-0.2, 0.2);
  for (int j = 0; j < opts.n_jitter; ++j) {
    auto s = starts[static_cast<std::size_t>(j) % starts.size()];
    for (std::size_t i = 0; i < n; ++i) {
      const double u = unif(rng);
      s[i] = kinds[i] == ParamKind::shape ? s[i] + 0.1 * u : s[i] * (1.0 + u);
    }
    starts.push_back(s);
  }

  const std::vector<bool> no_pin(n, false);
  Candidate best;
  for (const auto& s : starts) {
    auto c = optimize_from(exc, family, kinds, s, no_pin);
    if (c.loglik > best.loglik) best = std::move(c);
  }
  if (!(best.loglik > -kInfD))
    throw NonConvergenceError("all starting values failed for " + family_name(family));

  // Polish >=0 parameters sitting near zero onto the boundary.
  std::vector<bool> boundary(n, false);
  {
    std::vector<bool> pin(n, false);
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (kinds[i] == ParamKind::nonneg && best.values[i] < opts.boundary_tol) {
        pin[i] = true;
        any = true;
      }
    }
    if (any) {
      auto at_zero = best.values;
      for (std::size_t i = 0; i < n; ++i)
        if (pin[i]) at_zero[i] = 0.0;
      auto c = optimize_from(exc, family, kinds, at_zero, pin);
      if (c.loglik >= best.loglik - 1e-8) {
        best = std::move(c);
        for (std::size_t i = 0; i < n; ++i) boundary[i] = boundary[i] || pin[i];
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (kinds[i] == ParamKind::positive && best.values[i] < opts.boundary_tol)
      boundary[i] = true;
    if (kinds[i] == ParamKind::shape && best.values[i] < -1.0 + opts.boundary_tol)
      boundary[i] = true;
  }

  FitResult fr;
  fr.family = family;
  fr.thresh = thresh;
  fr.estimates = ParamVector{family, best.values, {}};
  fr.loglik = best.loglik;
  fr.n_exceedances = exc.total_weight();
  fr.converged = best.converged;
  fr.n_starts = static_cast<int>(starts.size());
  fr.boundary = boundary;
  fr.se.assign(n, std::nullopt);
  if (opts.compute_se) {
    try {
      fr.se = standard_errors(fr, exc);
    } catch (const SingularInformationError&) {
      // fit is still returned, standard errors stay absent
    }
  }
  return fr;
}

}  // namespace

FitResult fit_exceedances(const Dataset& exc, Family family, double thresh,
                          const std::vector<ParamVector>& starts,
                          const FitOptions& opts) {
  if (exc.empty() || exc.total_weight() <= 0.0)
    throw NoExceedancesError("no exceedances above the threshold");
  std::map<Family, FitResult> memo;
  return fit_impl(exc, family, thresh, starts, opts, memo);
}

FitResult fit(const Dataset& d, Family family, const ExceedanceConfig& cfg,
              const std::vector<ParamVector>& starts, const FitOptions& opts) {
  return fit_exceedances(to_exceedances(d, cfg), family, cfg.thresh, starts, opts);
}

std::vector<double> covariance(const FitResult& fr, const Dataset& exc) {
  const std::size_t n = fr.estimates.values.size();
  std::vector<std::size_t> interior;
  for (std::size_t i = 0; i < n; ++i)
    if (!fr.boundary[i]) interior.push_back(i);
  std::vector<double> out(n * n, 0.0);
  if (interior.empty()) return out;

  auto full = fr.estimates.values;
  auto objective = [&](const std::vector<double>& x) {
    for (std::size_t j = 0; j < interior.size(); ++j) full[interior[j]] = x[j];
    ParamVector p{fr.family, full, {}};
    if (!is_valid(p)) return -kInfD;
    return loglik(exc, p);
  };
  std::vector<double> x0(interior.size());
  for (std::size_t j = 0; j < interior.size(); ++j)
    x0[j] = fr.estimates.values[interior[j]];

  const auto H = fd_hessian(objective, x0, 1e-5);
  const auto m = static_cast<Eigen::Index>(interior.size());
  Eigen::MatrixXd info(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      info(i, j) = -H[static_cast<std::size_t>(i * m + j)];
  if (!info.allFinite())
    throw SingularInformationError("non-finite observed information");
  Eigen::LLT<Eigen::MatrixXd> llt(info);
  if (llt.info() != Eigen::Success)
    throw SingularInformationError("observed information is not positive definite");
  const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(m, m));
  for (std::size_t j = 0; j < interior.size(); ++j)
    for (std::size_t k = 0; k < interior.size(); ++k)
      out[interior[j] * n + interior[k]] =
          cov(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
  return out;
}

std::vector<std::optional<double>> standard_errors(const FitResult& fr,
                                                   const Dataset& exc) {
  const std::size_t n = fr.estimates.values.size();
  const auto cov = covariance(fr, exc);
  std::vector<std::optional<double>> se(n, std::nullopt);
  for (std::size_t i = 0; i < n; ++i) {
    if (fr.boundary[i]) continue;
    const double v = cov[i * n + i];
    if (v <= 0.0) throw SingularInformationError("negative variance estimate");
    se[i] = std::sqrt(v);
  }
  return se;
}

}  // namespace lifetail
