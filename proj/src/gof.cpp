#include "lifetail/gof.hpp"

#include <algorithm>
#include <boost/math/distributions/beta.hpp>
#include <cmath>
#include <functional>
#include <numeric>

#include "lifetail/errors.hpp"
#include "lifetail/families.hpp"

namespace lifetail {

namespace {

const std::vector<std::pair<PlotKind, std::string>>& kind_names() {
  static const std::vector<std::pair<PlotKind, std::string>> names = {
      {PlotKind::pp, "pp"},
      {PlotKind::qq, "qq"},
      {PlotKind::tmd, "tmd"},
      {PlotKind::exp_scale, "exp"},
      {PlotKind::erp, "erp"},
  };
  return names;
}

using CdfFn = std::function<double(double)>;

/// Distribution function of one record conditional on its truncation
/// window(s): {F(y) - F(a)} / {F(b) - F(a)}, summed over the windows for
/// double truncation.
double trunc_cdf(const CdfFn& F, const LifetimeRecord& r, double y) {
  auto mass = [&](double lo, double hi, double cap) {
    const double fl = lo <= 0.0 ? 0.0 : F(lo);
    const double fh = F(std::min(hi, cap));
    return std::max(fh - fl, 0.0);
  };
  if (!r.truncated()) return F(y);
  double num = mass(std::max(r.ltrunc1, 0.0), r.rtrunc1, y);
  double den = mass(std::max(r.ltrunc1, 0.0), r.rtrunc1, kInf);
  if (r.has_second_window()) {
    num += mass(r.ltrunc2, r.rtrunc2, y);
    den += mass(r.ltrunc2, r.rtrunc2, kInf);
  }
  return den > 0.0 ? num / den : 0.0;
}

struct Point {
  double u_par;  // parametric truncated probability of the failure
  double u_emp;  // nonparametric analogue
  double t;      // observed failure time
  double w;
};

}  // namespace

PlotKind plot_kind_from_string(const std::string& name) {
  for (const auto& [k, n] : kind_names())
    if (n == name) return k;
  throw DomainError("unknown plot kind: " + name);
}

const std::string& plot_kind_name(PlotKind kind) {
  for (const auto& [k, n] : kind_names())
    if (k == kind) return n;
  throw DomainError("unknown plot kind");
}

PlotData plotting_positions(const FitResult& fr, const Dataset& exc, PlotKind kind,
                            double band_level) {
  StepCDF scdf = np_fit(exc);
  scdf.convention = CdfConvention::interpolate;

  const CdfFn Fpar = [&](double t) {
    if (!(t < kInf)) return 1.0;
    return cdf(fr.estimates, t);
  };
  const CdfFn Femp = [&](double t) {
    if (!(t < kInf)) return 1.0;
    return eval_cdf(scdf, t);
  };

  std::vector<Point> pts;
  for (const auto& r : exc.records) {
    if (r.event != Event::observed) continue;
    Point p;
    p.t = r.time1;
    p.w = r.weight;
    p.u_par = std::clamp(trunc_cdf(Fpar, r, r.time1), 0.0, 1.0 - 1e-12);
    p.u_emp = std::clamp(trunc_cdf(Femp, r, r.time1), 0.0, 1.0 - 1e-12);
    pts.push_back(p);
  }
  if (pts.empty())
    throw NoObservedFailuresError("all records are censored; nothing to display");

  const bool by_emp = kind == PlotKind::pp;
  const bool by_time = kind == PlotKind::erp;
  std::sort(pts.begin(), pts.end(), [&](const Point& a, const Point& b) {
    if (by_emp) return a.u_emp < b.u_emp;
    if (by_time) return a.t < b.t;
    return a.u_par < b.u_par;
  });

  double W = 0.0;
  for (const auto& p : pts) W += p.w;
  const double alpha = 0.5 * (1.0 - band_level);

  auto par_q = [&](double u) {
    return quantile(fr.estimates, std::min(u, 1.0 - 1e-12));
  };
  auto exp_t = [](double u) { return -std::log1p(-u); };

  PlotData pd;
  pd.kind = kind;
  double rank = 0.0;
  for (const auto& p : pts) {
    rank += p.w;
    const double pos = rank / (W + 1.0);
    boost::math::beta_distribution<double> ord(rank, W + 1.0 - rank);
    const double ulo = boost::math::quantile(ord, alpha);
    const double uhi = boost::math::quantile(ord, 1.0 - alpha);
    switch (kind) {
      case PlotKind::pp:
        pd.x.push_back(p.u_emp);
        pd.y.push_back(p.u_par);
        pd.band_x.push_back(p.u_emp);
        pd.band_lower.push_back(ulo);
        pd.band_upper.push_back(uhi);
        break;
      case PlotKind::qq: {
        const double xq = par_q(pos);
        pd.x.push_back(xq);
        pd.y.push_back(par_q(p.u_par));
        pd.band_x.push_back(xq);
        pd.band_lower.push_back(par_q(ulo));
        pd.band_upper.push_back(par_q(uhi));
        break;
      }
      case PlotKind::tmd: {
        // Tukey mean-difference transform of the Q-Q pair (x, y):
        // abscissa (x + y) / 2, ordinate y - x; the band is centered on
        // the theoretical quantile
        const double xq = par_q(pos);
        const double yq = par_q(p.u_par);
        pd.x.push_back(0.5 * (xq + yq));
        pd.y.push_back(yq - xq);
        pd.band_x.push_back(xq);
        pd.band_lower.push_back(par_q(ulo) - xq);
        pd.band_upper.push_back(par_q(uhi) - xq);
        break;
      }
      case PlotKind::exp_scale: {
        // unit exponential scale: -log survival is Exp(1) under the fit
        const double xq = exp_t(pos);
        pd.x.push_back(xq);
        pd.y.push_back(exp_t(p.u_par));
        pd.band_x.push_back(xq);
        pd.band_lower.push_back(exp_t(ulo));
        pd.band_upper.push_back(exp_t(uhi));
        break;
      }
      case PlotKind::erp: {
        // empirically rescaled axes: the parametric probability of each
        // failure is pushed back to the time scale through the inverse
        // nonparametric estimator, so a good fit tracks the diagonal in
        // the units of the data even under heavy censoring
        pd.x.push_back(eval_quantile(scdf, p.u_par));
        pd.y.push_back(p.t);
        pd.band_x.push_back(p.t);
        pd.band_lower.push_back(eval_quantile(scdf, ulo));
        pd.band_upper.push_back(eval_quantile(scdf, uhi));
        break;
      }
    }
  }

  switch (kind) {
    case PlotKind::pp:
      pd.xlab = "empirical probability";
      pd.ylab = "fitted probability";
      break;
    case PlotKind::qq:
      pd.xlab = "theoretical quantile";
      pd.ylab = "rescaled exceedance";
      break;
    case PlotKind::tmd:
      pd.xlab = "quantile mean";
      pd.ylab = "quantile difference";
      break;
    case PlotKind::exp_scale:
      pd.xlab = "exponential plotting position";
      pd.ylab = "rescaled exceedance (exponential scale)";
      break;
    case PlotKind::erp:
      pd.xlab = "empirically rescaled position";
      pd.ylab = "observed failure time";
      break;
  }
  return pd;
}

}  // namespace lifetail
