// End-to-end acceptance checks, one per command line argument (1..12).
// Each check prints a single PASS/FAIL line; the exit status is the
// number of failures. Expected values come from independent oracles
// (grid search, quadrature, simplex maximization, distributional tests),
// not from the library under test.

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lifetail/data_model.hpp"
#include "lifetail/errors.hpp"
#include "lifetail/families.hpp"
#include "lifetail/gof.hpp"
#include "lifetail/inference.hpp"
#include "lifetail/likelihood.hpp"
#include "lifetail/npmle.hpp"
#include "lifetail/optim_fit.hpp"
#include "lifetail/sampling.hpp"

#include "oracles.hpp"

using namespace lifetail;

namespace {

Dataset fixture() { return load_csv(DATA_DIR "/japanese_f.csv"); }

FitOptions fast_opts() {
  FitOptions fo;
  fo.n_jitter = 0;
  fo.compute_se = false;
  return fo;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// 1. Aggregated female table: weight retained above age 108.
bool crit1(std::string& detail) {
  const auto d = fixture();
  const double w = to_exceedances(d, {108.0}).total_weight();
  detail = "exceedance weight " + fmt(w) + ", expected 2230";
  return d.size() == 100 && std::abs(w - 2230.0) < 1e-9;
}

// 2. Gompertz fit above 108 against an independent grid-refined search.
bool crit2(std::string& detail) {
  const auto exc = to_exceedances(fixture(), {108.0});
  const auto fr = fit_exceedances(exc, Family::gomp, 108.0);
  auto obj = [&](const std::vector<double>& v) {
    if (v[0] <= 0.0 || v[1] <= 0.0) return -kInf;
    return loglik_serial(exc, ParamVector{Family::gomp, v, {}});
  };
  const auto best = oracle::grid_refine(obj, {0.5, 0.01}, {4.0, 1.0}, 15, 40);
  const double ll_o = obj(best);

  const auto H = oracle::richardson_hessian(obj, best, 1e-4);
  const auto cov = oracle::invert({-H[0], -H[1], -H[2], -H[3]}, 2);
  const double se0 = std::sqrt(cov[0]), se1 = std::sqrt(cov[3]);

  const double e0 = std::abs(fr.estimates[0] - best[0]) / best[0];
  const double e1 = std::abs(fr.estimates[1] - best[1]) / best[1];
  const double el = std::abs(fr.loglik - ll_o) / std::abs(ll_o);
  const double es0 = std::abs(*fr.se[0] - se0) / se0;
  const double es1 = std::abs(*fr.se[1] - se1) / se1;
  detail = "scale " + fmt(fr.estimates[0]) + " se " + fmt(*fr.se[0]) +
           ", shape " + fmt(fr.estimates[1]) + " se " + fmt(*fr.se[1]) +
           ", loglik " + fmt(fr.loglik) + "; max rel err " +
           fmt(std::max({e0, e1, el, es0, es1}));
  return fr.converged && e0 < 1e-4 && e1 < 1e-4 && el < 1e-4 && es0 < 1e-4 &&
         es1 < 1e-4;
}

// 3. Null distribution of the boundary deviance: point mass at zero
// approaching one half, chi-square(1) above it. The exact boundary
// probability at this sample size comes from an analytic per-dataset
// oracle: the shape estimate is interior iff the score at shape zero is
// positive, which for exact exponential data reduces to m2 < 2 m1^2 in
// the first two sample moments. At n = 500 that probability is about
// 0.456, reaching 0.50 only asymptotically, so the point-mass check is
// made against the oracle with a looser direction bound on 0.50.
bool crit3(std::string& detail) {
  const auto fo = fast_opts();
  const int reps = 2000;
  int zeros = 0, oracle_zeros = 0, agree = 0;
  std::vector<double> positive;
  for (int r = 0; r < reps; ++r) {
    const auto d = sample_elife(500, {Family::exp, {1.0}, {}},
                                SamplingScheme::none_scheme(), 9000,
                                static_cast<std::uint64_t>(r));
    const auto fe = fit_exceedances(d, Family::exp, 0.0, {}, fo);
    const auto fg = fit_exceedances(d, Family::gomp, 0.0, {}, fo);
    const double stat = std::max(0.0, 2.0 * (fg.loglik - fe.loglik));
    const bool at_zero = stat < 1e-5;
    if (at_zero)
      ++zeros;
    else
      positive.push_back(stat);

    double m1 = 0.0, m2 = 0.0;
    for (const auto& rec : d.records) {
      m1 += rec.time1;
      m2 += rec.time1 * rec.time1;
    }
    m1 /= d.size();
    m2 /= d.size();
    const bool oracle_zero = m2 >= 2.0 * m1 * m1;
    if (oracle_zero) ++oracle_zeros;
    if (oracle_zero == at_zero) ++agree;
  }
  const double mass0 = static_cast<double>(zeros) / reps;
  const double mass0_oracle = static_cast<double>(oracle_zeros) / reps;
  const double agreement = static_cast<double>(agree) / reps;
  boost::math::chi_squared chi1(1);
  const double ks = oracle::ks_statistic(
      positive, [&](double x) { return boost::math::cdf(chi1, x); });
  const double crit = 1.628 / std::sqrt(static_cast<double>(positive.size()));
  detail = "mass at zero " + fmt(mass0) + " (score oracle " + fmt(mass0_oracle) +
           ", asymptote 0.50), per-dataset agreement " + fmt(agreement) +
           ", KS " + fmt(ks) + " vs 1% critical " + fmt(crit);
  return std::abs(mass0 - mass0_oracle) <= 0.01 && agreement >= 0.98 &&
         std::abs(mass0 - 0.5) <= 0.05 && ks < crit;
}

// 4. Constant-offset families are not testable against the exponential.
bool crit4(std::string& detail) {
  const auto d = fixture();
  const auto fo = fast_opts();
  const auto fe = fit(d, Family::exp, {108.0}, {}, fo);
  int raised = 0;
  for (Family f : {Family::gompmake, Family::perksmake, Family::beardmake}) {
    const auto fm = fit(d, f, {108.0}, {}, fo);
    try {
      lrt_nested(fe, fm);
    } catch (const ForbiddenComparisonError&) {
      ++raised;
    }
  }
  detail = "dedicated error raised for " + std::to_string(raised) +
           " of 3 constant-offset families";
  return raised == 3;
}

// 5. Smallest interval-censoring example with a known closed form.
bool crit5(std::string& detail) {
  Dataset d;
  LifetimeRecord r;
  r.time1 = 1.0;
  r.time2 = kInf;
  r.event = Event::right_censored;
  d.records.push_back(r);
  r = LifetimeRecord{};
  r.time1 = r.time2 = 1.0;
  d.records.push_back(r);
  r = LifetimeRecord{};
  r.time1 = r.time2 = 2.0;
  d.records.push_back(r);
  const auto scdf = np_fit(d, 1e-12);
  detail = "masses";
  for (double m : scdf.masses) detail += " " + fmt(m);
  detail += ", expected 1/3 2/3";
  return scdf.masses.size() == 2 &&
         std::abs(scdf.masses[0] - 1.0 / 3.0) < 1e-9 &&
         std::abs(scdf.masses[1] - 2.0 / 3.0) < 1e-9;
}

// 6. EM against direct simplex-constrained maximization on small random
// instances. Instances without an attainable maximizer (mass escaping
// past disconnected right-truncation windows) raise the iteration-cap
// error and are regenerated.
bool crit6(std::string& detail) {
  std::mt19937_64 rng(606);
  std::mt19937_64 oracle_rng(7);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto rec = [](double t1, double t2, Event e, double lt, double rt) {
    LifetimeRecord r;
    r.time1 = t1;
    r.time2 = t2;
    r.event = e;
    r.ltrunc1 = lt;
    r.rtrunc1 = rt;
    return r;
  };
  int compared = 0, degenerate = 0, attempts = 0, kkt_fail = 0;
  double worst = 0.0;
  while (compared < 50 && attempts < 300) {
    ++attempts;
    Dataset d;
    const int n = 3 + static_cast<int>(unif(rng) * 6);
    for (int i = 0; i < n; ++i) {
      const double t = std::round(unif(rng) * 12.0) / 2.0 + 0.5;
      double lt = -kInf, rt = kInf;
      if (unif(rng) < 0.3) lt = std::max(0.0, t - 2.0 - std::floor(unif(rng) * 3.0));
      const double u = unif(rng);
      if (u < 0.4) {
        d.records.push_back(rec(t, t, Event::observed, lt, rt));
      } else if (u < 0.7) {
        d.records.push_back(rec(t, t + 1.0 + std::floor(unif(rng) * 2.0),
                                Event::interval_censored, lt, rt));
      } else {
        rt = t + 4.0 + std::floor(unif(rng) * 4.0);
        d.records.push_back(rec(t, t, Event::observed, lt, rt));
      }
    }
    const auto iv = turnbull_intervals(d);
    StepCDF scdf;
    try {
      scdf = em_fit(d, iv, 1e-12);
    } catch (const MaxIterError&) {
      ++degenerate;
      continue;
    }
    if (!kkt_check(scdf, d).ok) ++kkt_fail;

    const auto mem = membership(d, iv);
    oracle::DenseSets sets;
    for (std::size_t i = 0; i < d.size(); ++i) {
      std::vector<char> a(iv.size(), 0), b(iv.size(), 0);
      for (std::size_t j = mem[i].alpha_lo; j <= mem[i].alpha_hi; ++j) a[j] = 1;
      for (std::size_t j = mem[i].beta_lo; j <= mem[i].beta_hi; ++j) b[j] = 1;
      sets.in_cens.push_back(std::move(a));
      sets.in_trunc.push_back(std::move(b));
      sets.weight.push_back(d.records[i].weight);
    }
    const auto best = oracle::simplex_maximize(sets, iv.size(), oracle_rng);
    const double gap = oracle::dense_loglik(sets, best) -
                       oracle::dense_loglik(sets, scdf.masses);
    worst = std::max(worst, gap);
    ++compared;
  }
  detail = std::to_string(compared) + " instances compared (" +
           std::to_string(degenerate) +
           " without an attainable maximizer regenerated), worst oracle gap " +
           fmt(worst) + ", KKT failures " + std::to_string(kkt_fail);
  return compared == 50 && worst < 1e-6 && kkt_fail == 0;
}

// 7. Survival equals the exponentiated integrated hazard everywhere.
bool crit7(std::string& detail) {
  std::mt19937_64 rng(77);
  auto unif = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  double worst = 0.0;
  for (Family f : all_families()) {
    for (int rep = 0; rep < 20; ++rep) {
      ParamVector p;
      p.family = f;
      switch (f) {
        case Family::exp: p.values = {unif(0.5, 3.0)}; break;
        case Family::gomp: p.values = {unif(0.5, 3.0), unif(0.1, 2.0)}; break;
        case Family::gp: p.values = {unif(0.5, 3.0), unif(-0.5, 1.0)}; break;
        case Family::weibull: p.values = {unif(0.5, 3.0), unif(1.0, 3.0)}; break;
        case Family::extgp:
          p.values = {unif(0.5, 3.0), unif(0.2, 2.0), unif(-0.5, 1.0)};
          break;
        case Family::extweibull:
          p.values = {unif(0.5, 3.0), unif(1.0, 3.0), unif(-0.5, 1.0)};
          break;
        case Family::perks: p.values = {unif(0.2, 2.0), unif(0.0, 2.0)}; break;
        case Family::beard:
          p.values = {unif(0.2, 2.0), unif(0.05, 2.0), unif(0.05, 2.0)};
          break;
        case Family::gompmake:
          p.values = {unif(0.5, 3.0), unif(0.1, 2.0), unif(0.0, 1.0)};
          break;
        case Family::perksmake:
          p.values = {unif(0.2, 2.0), unif(0.0, 2.0), unif(0.0, 1.0)};
          break;
        case Family::beardmake:
          p.values = {unif(0.2, 2.0), unif(0.05, 2.0), unif(0.05, 2.0),
                      unif(0.0, 1.0)};
          break;
        case Family::gppiece:
          for (;;) {
            try {
              p = gppiece_params(
                  unif(0.5, 2.0),
                  {unif(-0.3, 0.5), unif(-0.3, 0.5), unif(-0.3, 0.5)},
                  {0.0, 1.0, 2.0});
              break;
            } catch (const ConstraintError&) {
            }
          }
          break;
      }
      const double hi = 0.95 * std::min(endpoint(p), quantile(p, 0.99));
      for (int i = 1; i <= 20; ++i) {
        const double t = hi * i / 20.0;
        const double H =
            oracle::integrate([&](double s) { return hazard(p, s); }, 0.0, t, 1e-10);
        worst = std::max(worst, std::abs(survival(p, t) - std::exp(-H)));
      }
    }
  }
  detail = "12 families x 20 parameter sets x 20 points, worst |S - exp(-H)| = " +
           fmt(worst);
  return worst < 1e-6;
}

// 8. Window-truncated sampling matches the analytic truncated law for
// every family.
bool crit8(std::string& detail) {
  const std::size_t n = 100000;
  const double crit = 1.628 / std::sqrt(static_cast<double>(n));
  double worst = 0.0;
  std::string worst_at;
  std::uint64_t seed = 100;
  for (Family f : all_families()) {
    ParamVector p;
    p.family = f;
    switch (f) {
      case Family::exp: p.values = {1.2}; break;
      case Family::gomp: p.values = {1.0, 0.7}; break;
      case Family::gp: p.values = {1.0, -0.3}; break;
      case Family::weibull: p.values = {1.0, 1.8}; break;
      case Family::extgp: p.values = {1.0, 0.6, 0.2}; break;
      case Family::extweibull: p.values = {1.0, 1.4, -0.2}; break;
      case Family::perks: p.values = {0.8, 0.5}; break;
      case Family::beard: p.values = {0.8, 0.5, 0.7}; break;
      case Family::gompmake: p.values = {1.0, 0.7, 0.3}; break;
      case Family::perksmake: p.values = {0.8, 0.5, 0.3}; break;
      case Family::beardmake: p.values = {0.8, 0.5, 0.7, 0.3}; break;
      case Family::gppiece:
        p = gppiece_params(1.0, {-0.2, 0.3}, {0.0, 1.0});
        break;
    }
    const std::pair<double, double> windows[3] = {
        {0.02, 0.55}, {0.35, 0.97}, {0.15, 0.75}};
    for (const auto& [qlo, qhi] : windows) {
      const double a = quantile(p, qlo), b = quantile(p, qhi);
      SamplingScheme sch;
      sch.kind = SamplingKind::ltrt;
      sch.lower = {a};
      sch.upper = {b};
      const auto d = sample_elife(n, p, sch, seed++);
      std::vector<double> x;
      x.reserve(n);
      for (const auto& r : d.records) x.push_back(r.time1);
      const double Fa = cdf(p, a), Fb = cdf(p, b);
      const double ks = oracle::ks_statistic(
          x, [&](double t) { return (cdf(p, t) - Fa) / (Fb - Fa); });
      if (ks > worst) {
        worst = ks;
        worst_at = family_name(f);
      }
    }
  }
  detail = "36 family/window settings x 1e5 draws, worst KS " + fmt(worst) +
           " (" + worst_at + ") vs 1% critical " + fmt(crit);
  return worst < crit;
}

// 9. Endpoint profile likelihood: point estimate, coverage, cutoff
// placement, and asymmetry on the aggregated table.
bool crit9(std::string& detail) {
  const auto d = sample_elife(10000, {Family::gp, {1.0, -0.5}, {}},
                              SamplingScheme::none_scheme(), 909);
  const auto pc = profile_endpoint(d, {0.0});
  auto prof_drop = [&](double psi) {
    auto obj = [&](const std::vector<double>& v) {
      if (v[0] <= 0.0) return -kInf;
      return loglik_serial(d, ParamVector{Family::gp, {v[0], -v[0] / psi}, {}});
    };
    const auto best = oracle::grid_refine(obj, {0.01}, {5.0}, 25, 40);
    return 2.0 * (obj(best) - pc.loglik_hat);
  };
  const double dlo = prof_drop(pc.lower);
  const double dhi = prof_drop(pc.upper);
  const bool sim_ok = pc.psi_hat >= 1.8 && pc.psi_hat <= 2.2 &&
                      pc.lower <= 2.0 && 2.0 <= pc.upper &&
                      std::abs(dlo + 3.841) < 0.02 && std::abs(dhi + 3.841) < 0.02;

  const auto pc2 = profile_endpoint(fixture(), {110.0});
  const double up = pc2.upper - pc2.psi_hat;
  const double down = pc2.psi_hat - pc2.lower;
  const bool skew_ok = std::isfinite(pc2.upper) ? up > 3.0 * down : true;
  detail = "psi_hat " + fmt(pc.psi_hat) + " CI [" + fmt(pc.lower) + ", " +
           fmt(pc.upper) + "], 2*drop at bounds " + fmt(dlo) + "/" + fmt(dhi) +
           "; table CI [" + fmt(pc2.lower) + ", " +
           (std::isfinite(pc2.upper) ? fmt(pc2.upper) : "inf") +
           "] around " + fmt(pc2.psi_hat);
  return sim_ok && skew_ok;
}

// 10. Parametric bootstrap comparison on the aggregated table rejects
// the constant hazard decisively.
bool crit10(std::string& detail) {
  const auto exc = to_exceedances(fixture(), {108.0});
  const auto res = bootstrap_lrt(exc, Family::exp, Family::gomp, 999, 2024);
  detail = "observed deviance " + fmt(res.observed) + ", p = " +
           fmt(res.pvalue) + " from " + std::to_string(res.replicates.size()) +
           " replicates";
  return res.observed > 0.0 && res.pvalue < 0.01 && !res.failure_warning;
}

// 11. Diagnostic plots reduce to the classical constructions without
// censoring, and the pointwise bands hold their nominal level.
bool crit11(std::string& detail) {
  const auto d = sample_elife(50, {Family::gomp, {1.0, 0.8}, {}},
                              SamplingScheme::none_scheme(), 1111);
  const auto fr = fit_exceedances(d, Family::gomp);
  const ParamVector pv{fr.family, fr.estimates.values, {}};
  std::vector<double> t;
  for (const auto& r : d.records) t.push_back(r.time1);
  std::sort(t.begin(), t.end());
  const auto pp = plotting_positions(fr, d, PlotKind::pp);
  const auto qq = plotting_positions(fr, d, PlotKind::qq);
  double worst = 0.0;
  for (std::size_t i = 0; i < 50; ++i) {
    worst = std::max(worst, std::abs(pp.x[i] - (i + 1.0) / 50.0));
    worst = std::max(worst, std::abs(pp.y[i] - cdf(pv, t[i])));
    worst = std::max(worst, std::abs(qq.x[i] - quantile(pv, (i + 1.0) / 51.0)));
    worst = std::max(worst, std::abs(qq.y[i] - t[i]));
  }
  const bool classical_ok = worst < 1e-8;

  // band calibration: under the data-generating parameters the beta
  // order-statistic bands are exactly pointwise calibrated; positions
  // computed from a fitted model shrink toward the band center and are
  // conservative, which is reported but not held to the nominal level
  const auto fo = fast_opts();
  double in_true = 0.0, in_fit = 0.0, total = 0.0;
  FitResult truth;
  truth.family = Family::exp;
  truth.estimates = {Family::exp, {1.0}, {}};
  for (int rep = 0; rep < 500; ++rep) {
    const auto s = sample_elife(100, {Family::exp, {1.0}, {}},
                                SamplingScheme::none_scheme(), 5000,
                                static_cast<std::uint64_t>(rep));
    const auto pd_true = plotting_positions(truth, s, PlotKind::pp, 0.95);
    const auto fs = fit_exceedances(s, Family::exp, 0.0, {}, fo);
    const auto pd_fit = plotting_positions(fs, s, PlotKind::pp, 0.95);
    for (std::size_t i = 0; i < pd_true.y.size(); ++i) {
      total += 1.0;
      if (pd_true.y[i] >= pd_true.band_lower[i] &&
          pd_true.y[i] <= pd_true.band_upper[i])
        in_true += 1.0;
      if (pd_fit.y[i] >= pd_fit.band_lower[i] &&
          pd_fit.y[i] <= pd_fit.band_upper[i])
        in_fit += 1.0;
    }
  }
  const double cover = in_true / total;
  const double cover_fit = in_fit / total;
  detail = "classical reduction max err " + fmt(worst) + "; band coverage " +
           fmt(cover) + " (nominal 0.95 +- 0.03; fitted-model positions " +
           fmt(cover_fit) + ", conservative as expected)";
  return classical_ok && cover >= 0.92 && cover <= 0.98 && cover_fit >= 0.92;
}

// 12. Score tests for a changing tail shape: uniform p-values when the
// shape is constant, decisive rejection at a built-in break.
bool crit12(std::string& detail) {
  std::vector<double> pvals;
  int not_ok = 0;
  const ParamVector truth{Family::gp, {1.0, 0.1}, {}};
  const double u1 = quantile(truth, 0.5);
  for (int rep = 0; rep < 500; ++rep) {
    const auto d = sample_elife(1000, truth, SamplingScheme::none_scheme(),
                                12000, static_cast<std::uint64_t>(rep));
    const auto diag = nc_score_test(d, {0.0, u1});
    if (diag.entries.size() == 1 && diag.entries[0].ok)
      pvals.push_back(diag.entries[0].pvalue);
    else
      ++not_ok;
  }
  const double ks =
      oracle::ks_statistic(pvals, [](double x) { return x; });
  const double crit = 1.628 / std::sqrt(static_cast<double>(pvals.size()));

  const auto broken = gppiece_params(1.0, {-0.3, 0.3}, {0.0, 1.0});
  const auto db = sample_elife(5000, broken, SamplingScheme::none_scheme(), 77);
  const auto diag_b = nc_score_test(db, {0.0, 1.0, 2.0});
  const bool break_ok = diag_b.entries.size() == 2 && diag_b.entries[0].ok &&
                        diag_b.entries[0].pvalue < 0.01;
  detail = "uniformity KS " + fmt(ks) + " vs 1% critical " + fmt(crit) + " (" +
           std::to_string(not_ok) + " failed reps), break p " +
           (diag_b.entries.empty() ? "n/a" : fmt(diag_b.entries[0].pvalue));
  return ks < crit && not_ok <= 10 && break_ok;
}

}  // namespace

int main(int argc, char** argv) {
  using Crit = bool (*)(std::string&);
  const Crit crits[12] = {crit1, crit2, crit3, crit4,  crit5,  crit6,
                          crit7, crit8, crit9, crit10, crit11, crit12};
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  if (which.empty())
    for (int i = 1; i <= 12; ++i) which.push_back(i);

  int failures = 0;
  for (int n : which) {
    if (n < 1 || n > 12) {
      std::printf("ACCEPTANCE %d: FAIL - no such criterion\n", n);
      ++failures;
      continue;
    }
    std::string detail;
    bool pass = false;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      pass = crits[n - 1](detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::printf("ACCEPTANCE %d: %s - %s [%.1fs]\n", n, pass ? "PASS" : "FAIL",
                detail.c_str(), secs);
    if (!pass) ++failures;
  }
  return failures;
}
