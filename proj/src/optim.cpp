#include "lifetail/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lifetail/errors.hpp"

namespace lifetail {

namespace {

constexpr double kInfD = std::numeric_limits<double>::infinity();

double guarded(const ObjectiveFn& f, const std::vector<double>& x) {
  const double v = f(x);
  return std::isnan(v) ? kInfD : v;
}

NelderMeadResult nm_once(const ObjectiveFn& f, const std::vector<double>& x0,
                         double step, double ftol, int max_iter) {
  const std::size_t n = x0.size();
  std::vector<std::vector<double>> pts(n + 1, x0);
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    double h = step * std::max(1.0, std::abs(x0[i]));
    pts[i + 1][i] += h;
  }
  for (std::size_t i = 0; i <= n; ++i) fv[i] = guarded(f, pts[i]);

  std::vector<std::size_t> order(n + 1);
  int iter = 0;
  bool converged = false;
  auto sort_simplex = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
  };
  while (iter < max_iter) {
    sort_simplex();
    const std::size_t lo = order[0], hi = order[n], nh = order[n - 1];
    if (std::isfinite(fv[lo]) &&
        (fv[hi] - fv[lo] < ftol * (std::abs(fv[lo]) + 1e-30) || fv[hi] == fv[lo])) {
      converged = true;
      break;
    }
    ++iter;
    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
      if (i == hi) continue;
      for (std::size_t j = 0; j < n; ++j) centroid[j] += pts[i][j] / double(n);
    }
    auto blend = [&](double coef) {
      std::vector<double> x(n);
      for (std::size_t j = 0; j < n; ++j)
        x[j] = centroid[j] + coef * (pts[hi][j] - centroid[j]);
      return x;
    };
    auto xr = blend(-1.0);
    double fr = guarded(f, xr);
    if (fr < fv[lo]) {
      auto xe = blend(-2.0);
      double fe = guarded(f, xe);
      if (fe < fr) {
        pts[hi] = std::move(xe);
        fv[hi] = fe;
      } else {
        pts[hi] = std::move(xr);
        fv[hi] = fr;
      }
    } else if (fr < fv[nh]) {
      pts[hi] = std::move(xr);
      fv[hi] = fr;
    } else {
      auto xc = blend(fr < fv[hi] ? -0.5 : 0.5);
      double fc = guarded(f, xc);
      if (fc < std::min(fr, fv[hi])) {
        pts[hi] = std::move(xc);
        fv[hi] = fc;
      } else {  // shrink towards the best vertex
        for (std::size_t i = 0; i <= n; ++i) {
          if (i == lo) continue;
          for (std::size_t j = 0; j < n; ++j)
            pts[i][j] = pts[lo][j] + 0.5 * (pts[i][j] - pts[lo][j]);
          fv[i] = guarded(f, pts[i]);
        }
      }
    }
  }
  sort_simplex();
  return {pts[order[0]], fv[order[0]], iter, converged};
}

}  // namespace

NelderMeadResult nelder_mead(const ObjectiveFn& f, std::vector<double> x0,
                             const NelderMeadOptions& opts) {
  if (x0.empty()) throw DomainError("nelder_mead needs at least one variable");
  auto best = nm_once(f, x0, opts.initial_step, opts.ftol, opts.max_iter);
  for (int r = 0; r < opts.restarts; ++r) {
    auto next =
        nm_once(f, best.x, opts.initial_step * 0.1, opts.ftol, opts.max_iter);
    next.iterations += best.iterations;
    next.converged = next.converged && best.converged;
    if (next.fmin <= best.fmin) best = std::move(next);
    else break;
  }
  return best;
}

double brent_minimize(const std::function<double(double)>& f, double a, double b,
                      double tol, double* fmin_out) {
  const double golden = 0.3819660112501051;
  double x = a + golden * (b - a), w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double m = 0.5 * (a + b);
    const double tol1 = tol * std::abs(x) + 1e-12;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) break;
    double p = 0.0, q = 0.0, r = 0.0;
    bool parabolic = false;
    if (std::abs(e) > tol1) {
      r = (x - w) * (fx - fv);
      q = (x - v) * (fx - fw);
      p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      if (std::abs(p) < std::abs(0.5 * q * e) && p > q * (a - x) && p < q * (b - x)) {
        e = d;
        d = p / q;
        parabolic = true;
      }
    }
    if (!parabolic) {
      e = (x < m ? b : a) - x;
      d = golden * e;
    }
    const double u = x + (std::abs(d) >= tol1 ? d : (d > 0 ? tol1 : -tol1));
    const double fu = f(u);
    if (fu <= fx) {
      (u < x ? b : a) = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      (u < x ? a : b) = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  if (fmin_out) *fmin_out = fx;
  return x;
}

std::vector<double> fd_gradient(const ObjectiveFn& f, const std::vector<double>& x,
                                double h0) {
  std::vector<double> g(x.size());
  std::vector<double> xp = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = std::max(h0, h0 * std::abs(x[i]));
    xp[i] = x[i] + h;
    const double fp = f(xp);
    xp[i] = x[i] - h;
    const double fm = f(xp);
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

std::vector<double> fd_hessian(const ObjectiveFn& f, const std::vector<double>& x,
                               double h0) {
  const std::size_t n = x.size();
  std::vector<double> H(n * n, 0.0);
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = std::max(h0, h0 * std::abs(x[i]));
  const double f0 = f(x);
  std::vector<double> xp = x;
  for (std::size_t i = 0; i < n; ++i) {
    xp[i] = x[i] + h[i];
    const double fp = f(xp);
    xp[i] = x[i] - h[i];
    const double fm = f(xp);
    xp[i] = x[i];
    H[i * n + i] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      xp[i] = x[i] + h[i]; xp[j] = x[j] + h[j];
      const double fpp = f(xp);
      xp[j] = x[j] - h[j];
      const double fpm = f(xp);
      xp[i] = x[i] - h[i]; xp[j] = x[j] + h[j];
      const double fmp = f(xp);
      xp[j] = x[j] - h[j];
      const double fmm = f(xp);
      xp[i] = x[i]; xp[j] = x[j];
      const double v = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
      H[i * n + j] = v;
      H[j * n + i] = v;
    }
  }
  return H;
}

MonotoneCubic::MonotoneCubic(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
  const std::size_t n = xs_.size();
  if (n < 2 || ys_.size() != n) throw DomainError("MonotoneCubic needs >= 2 knots");
  std::vector<double> delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (!(xs_[i + 1] > xs_[i])) throw DomainError("MonotoneCubic knots must increase");
    delta[i] = (ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i]);
  }
  slopes_.assign(n, 0.0);
  slopes_[0] = delta[0];
  slopes_[n - 1] = delta[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] > 0.0) {
      const double w1 = 2.0 * (xs_[i + 1] - xs_[i]) + (xs_[i] - xs_[i - 1]);
      const double w2 = (xs_[i + 1] - xs_[i]) + 2.0 * (xs_[i] - xs_[i - 1]);
      slopes_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  // Fritsch-Carlson limiter
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (delta[i] == 0.0) {
      slopes_[i] = slopes_[i + 1] = 0.0;
    } else {
      const double a = slopes_[i] / delta[i];
      const double b = slopes_[i + 1] / delta[i];
      const double s = a * a + b * b;
      if (s > 9.0) {
        const double tau = 3.0 / std::sqrt(s);
        slopes_[i] = tau * a * delta[i];
        slopes_[i + 1] = tau * b * delta[i];
      }
    }
  }
}

double MonotoneCubic::operator()(double x) const {
  const std::size_t n = xs_.size();
  if (x <= xs_.front()) return ys_.front();
  if (x >= xs_.back()) return ys_.back();
  std::size_t i =
      std::upper_bound(xs_.begin(), xs_.end(), x) - xs_.begin() - 1;
  const double h = xs_[i + 1] - xs_[i];
  const double t = (x - xs_[i]) / h;
  const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
  const double h10 = t * (1 - t) * (1 - t);
  const double h01 = t * t * (3 - 2 * t);
  const double h11 = t * t * (t - 1);
  return h00 * ys_[i] + h10 * h * slopes_[i] + h01 * ys_[i + 1] +
         h11 * h * slopes_[i + 1];
}

double MonotoneCubic::solve(double y) const {
  double lo = xs_.front(), hi = xs_.back();
  double flo = (*this)(lo), fhi = (*this)(hi);
  if ((y - flo) * (y - fhi) > 0.0) throw DomainError("MonotoneCubic::solve: no crossing");
  const bool increasing = fhi > flo;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = (*this)(mid);
    if ((fm < y) == increasing) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace lifetail
