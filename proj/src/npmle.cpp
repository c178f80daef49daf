#include "lifetail/npmle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lifetail/errors.hpp"

namespace lifetail {

namespace {

// tie tolerance for comparing censoring/truncation bounds
const double kTol = std::sqrt(std::numeric_limits<double>::epsilon());

bool close(double x, double y) {
  return std::abs(x - y) <= kTol * (1.0 + std::min(std::abs(x), std::abs(y)));
}

/// Censoring set of one record as (left bound, open flag, right bound).
struct CensSet {
  double left;
  bool open_left;
  double right;
};

CensSet cens_set(const LifetimeRecord& r) {
  switch (r.event) {
    case Event::observed: return {r.time1, false, r.time1};
    case Event::right_censored: return {r.time1, true, kInf};
    case Event::left_censored: return {0.0, false, r.time2};
    case Event::interval_censored: return {r.time1, true, r.time2};
  }
  return {r.time1, false, r.time1};
}

/// Is a class left endpoint (av, aopen) inside a set opening at
/// (lv, lopen)? Equal values admit everything except a closed class
/// start at an open set start.
bool left_inside(double av, bool aopen, double lv, bool lopen) {
  if (close(av, lv)) return aopen || !lopen;
  return av > lv;
}

std::size_t lower_alpha(const TurnbullIntervals& iv, double lv, bool lopen) {
  std::size_t lo = 0, hi = iv.size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (left_inside(iv.intervals[mid].a, iv.intervals[mid].open_left, lv, lopen))
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

/// One past the last class whose right end fits under rv.
std::size_t upper_right(const TurnbullIntervals& iv, double rv) {
  std::size_t lo = 0, hi = iv.size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    const double b = iv.intervals[mid].b;
    if (b <= rv || close(b, rv)) lo = mid + 1;
    else hi = mid;
  }
  return lo;
}

std::size_t lower_beta(const TurnbullIntervals& iv, double vv) {
  std::size_t lo = 0, hi = iv.size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    const double a = iv.intervals[mid].a;
    if (a >= vv || close(a, vv)) hi = mid;
    else lo = mid + 1;
  }
  return lo;
}

struct EmState {
  std::vector<MembershipRange> mem;
  std::vector<double> w;
  double total_w = 0.0;
};

double range_sum(const std::vector<double>& prefix, std::size_t lo, std::size_t hi) {
  return prefix[hi + 1] - prefix[lo];
}

double record_alpha_mass(const std::vector<double>& prefix, const MembershipRange& m) {
  return range_sum(prefix, m.alpha_lo, m.alpha_hi);
}

double record_beta_mass(const std::vector<double>& prefix, const MembershipRange& m) {
  double s = range_sum(prefix, m.beta_lo, m.beta_hi);
  if (m.has_beta2()) s += range_sum(prefix, m.beta2_lo, m.beta2_hi);
  return s;
}

double loglik_from_masses(const EmState& st, const std::vector<double>& p) {
  std::vector<double> prefix(p.size() + 1, 0.0);
  std::partial_sum(p.begin(), p.end(), prefix.begin() + 1);
  double ll = 0.0;
  for (std::size_t i = 0; i < st.mem.size(); ++i) {
    const double a = record_alpha_mass(prefix, st.mem[i]);
    const double b = record_beta_mass(prefix, st.mem[i]);
    if (!(a > 0.0) || !(b > 0.0)) return -kInf;
    ll += st.w[i] * (std::log(a) - std::log(b));
  }
  return ll;
}

}  // namespace

TurnbullIntervals turnbull_intervals(const Dataset& d) {
  if (d.empty()) throw EmptyDatasetError("no records");

  // snap near-equal bounds onto shared representatives first, so the
  // sweep can order ties exactly
  std::vector<double> vals;
  auto add_val = [&](double v) {
    if (std::isfinite(v)) vals.push_back(v);
  };
  for (const auto& r : d.records) {
    const auto s = cens_set(r);
    add_val(s.left);
    add_val(s.right);
    add_val(std::max(r.ltrunc1, 0.0));
    add_val(r.rtrunc1);
    if (r.has_second_window()) {
      add_val(r.ltrunc2);
      add_val(r.rtrunc2);
    }
  }
  std::sort(vals.begin(), vals.end());
  std::vector<double> reps;
  for (double v : vals)
    if (reps.empty() || !close(reps.back(), v)) reps.push_back(v);
  auto snap = [&](double v) {
    if (!std::isfinite(v)) return v;
    auto it = std::lower_bound(reps.begin(), reps.end(), v);
    if (it != reps.end() && close(*it, v)) return *it;
    if (it != reps.begin() && close(*(it - 1), v)) return *(it - 1);
    return v;
  };

  // sweep events: closed class starts sort before right ends, which
  // sort before open class starts at the same value
  enum Side { closed_left = 0, right_end = 1, open_left = 2 };
  struct Ev {
    double v;
    int side;
  };
  std::vector<Ev> evs;
  for (const auto& r : d.records) {
    const auto s = cens_set(r);
    evs.push_back({snap(s.left), s.open_left ? open_left : closed_left});
    evs.push_back({snap(s.right), right_end});
    if (r.rtrunc1 < kInf) evs.push_back({snap(r.rtrunc1), closed_left});
    if (r.ltrunc1 > 0.0) evs.push_back({snap(r.ltrunc1), right_end});
    if (r.has_second_window()) {
      if (r.rtrunc2 < kInf) evs.push_back({snap(r.rtrunc2), closed_left});
      evs.push_back({snap(r.ltrunc2), right_end});
    }
  }
  std::sort(evs.begin(), evs.end(), [](const Ev& x, const Ev& y) {
    if (x.v != y.v) return x.v < y.v;
    return x.side < y.side;
  });

  TurnbullIntervals out;
  bool have_left = false;
  double lv = 0.0;
  bool lopen = false;
  for (const auto& e : evs) {
    if (e.side == right_end) {
      if (have_left) {
        out.intervals.push_back({lv, e.v, lopen});
        have_left = false;
      }
    } else {
      lv = e.v;
      lopen = e.side == open_left;
      have_left = true;
    }
  }
  if (out.intervals.empty())
    throw EmptyIntervalSetError("no admissible mass intervals; data are inconsistent");
  return out;
}

std::vector<MembershipRange> membership(const Dataset& d, const TurnbullIntervals& iv) {
  const std::size_t m = iv.size();
  std::vector<MembershipRange> out;
  out.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& r = d.records[i];
    const auto s = cens_set(r);
    MembershipRange mr;
    const std::size_t alo = lower_alpha(iv, s.left, s.open_left);
    const std::size_t ahi = upper_right(iv, s.right);
    if (alo >= ahi)
      throw EmptyIntervalSetError("record " + std::to_string(i + 1) +
                                  " admits no mass interval");
    mr.alpha_lo = alo;
    mr.alpha_hi = ahi - 1;

    const std::size_t blo = lower_beta(iv, std::max(r.ltrunc1, 0.0));
    const std::size_t bhi = upper_right(iv, r.rtrunc1);
    mr.beta_lo = blo;
    mr.beta_hi = bhi > 0 ? bhi - 1 : 0;
    if (r.has_second_window()) {
      mr.beta2_lo = lower_beta(iv, r.ltrunc2);
      const std::size_t b2 = upper_right(iv, r.rtrunc2);
      mr.beta2_hi = b2 > 0 ? b2 - 1 : 0;
      if (mr.beta2_lo > mr.beta2_hi) {
        mr.beta2_lo = 1;
        mr.beta2_hi = 0;
      }
    } else {
      // a censoring set always lies inside its truncation set
      mr.beta_lo = std::min(mr.beta_lo, mr.alpha_lo);
      mr.beta_hi = std::max(mr.beta_hi, mr.alpha_hi);
    }
    if (mr.beta_hi >= m) mr.beta_hi = m - 1;
    out.push_back(mr);
  }
  return out;
}

StepCDF em_fit(const Dataset& d, const TurnbullIntervals& iv, double tol, int maxit,
               EmDiagnostics* diag) {
  const std::size_t m = iv.size();
  EmState st;
  st.mem = membership(d, iv);
  for (const auto& r : d.records) st.w.push_back(r.weight);
  st.total_w = d.total_weight();

  std::vector<double> p(m, 1.0 / static_cast<double>(m));
  std::vector<double> prefix(m + 1), grow(m + 1), ghost(m + 1);
  double ll_prev = -kInf;
  bool monotone = true;
  bool converged = false;
  int it = 0;

  auto one_step = [&](const std::vector<double>& cur, std::vector<double>& next) {
    std::partial_sum(cur.begin(), cur.end(), prefix.begin() + 1);
    prefix[0] = 0.0;
    std::fill(grow.begin(), grow.end(), 0.0);
    std::fill(ghost.begin(), ghost.end(), 0.0);
    double total = 0.0;  // expected count including truncated-out mass
    for (std::size_t i = 0; i < st.mem.size(); ++i) {
      const auto& mr = st.mem[i];
      const double ai = record_alpha_mass(prefix, mr);
      const double bi = record_beta_mass(prefix, mr);
      const double wa = st.w[i] / ai;
      const double wb = st.w[i] / bi;
      grow[mr.alpha_lo] += wa;
      grow[mr.alpha_hi + 1] -= wa;
      ghost[mr.beta_lo] += wb;
      ghost[mr.beta_hi + 1] -= wb;
      if (mr.has_beta2()) {
        ghost[mr.beta2_lo] += wb;
        ghost[mr.beta2_hi + 1] -= wb;
      }
      total += wb;
    }
    double g = 0.0, h = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      g += grow[j];
      h += ghost[j];
      next[j] = cur[j] * (g + total - h) / total;
    }
  };

  std::vector<double> pn(m), pd(m);
  for (it = 1; it <= maxit; ++it) {
    one_step(p, pn);

    if (it % 100 == 0) {
      // doubled step, kept only when the log likelihood does not drop
      double mass = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        pd[j] = std::max(pn[j] + (pn[j] - p[j]), 0.0);
        mass += pd[j];
      }
      if (mass > 0.0) {
        for (auto& v : pd) v /= mass;
        if (loglik_from_masses(st, pd) >= loglik_from_masses(st, pn)) pn = pd;
      }
    }

    const double ll = loglik_from_masses(st, pn);
    if (ll < ll_prev - 1e-8 * (1.0 + std::abs(ll_prev))) monotone = false;
    ll_prev = ll;

    double delta = 0.0;
    for (std::size_t j = 0; j < m; ++j) delta = std::max(delta, std::abs(pn[j] - p[j]));
    p.swap(pn);
    if (delta < tol) {
      converged = true;
      break;
    }
  }

  // complementary slackness cleanup: a strictly negative gradient at a
  // vanishing mass marks an interval whose optimal mass is zero; the
  // step-size stopping rule can leave such stragglers marginally positive
  {
    std::partial_sum(p.begin(), p.end(), prefix.begin() + 1);
    prefix[0] = 0.0;
    std::fill(grow.begin(), grow.end(), 0.0);
    std::fill(ghost.begin(), ghost.end(), 0.0);
    for (const auto& mr : st.mem) {
      const std::size_t i = static_cast<std::size_t>(&mr - st.mem.data());
      const double ai = record_alpha_mass(prefix, mr);
      const double bi = record_beta_mass(prefix, mr);
      if (!(ai > 0.0) || !(bi > 0.0)) break;
      grow[mr.alpha_lo] += st.w[i] / ai;
      grow[mr.alpha_hi + 1] -= st.w[i] / ai;
      ghost[mr.beta_lo] += st.w[i] / bi;
      ghost[mr.beta_hi + 1] -= st.w[i] / bi;
      if (mr.has_beta2()) {
        ghost[mr.beta2_lo] += st.w[i] / bi;
        ghost[mr.beta2_hi + 1] -= st.w[i] / bi;
      }
    }
    double ga = 0.0, gb = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      ga += grow[j];
      gb += ghost[j];
      if (p[j] > 0.0 && p[j] < 1e-8 && (ga - gb) / st.total_w < -1e-6) p[j] = 0.0;
    }
  }

  double mass = 0.0;
  for (auto& v : p) {
    if (v < 1e-12) v = 0.0;
    mass += v;
  }
  for (auto& v : p) v /= mass;

  StepCDF scdf;
  scdf.intervals = iv;
  scdf.masses = p;
  if (diag) {
    diag->iterations = std::min(it, maxit);
    diag->loglik = loglik_from_masses(st, p);
    diag->converged = converged;
    diag->monotone = monotone;
  }
  if (!converged) {
    const auto kkt = kkt_check(scdf, d);
    if (!kkt.ok)
      throw MaxIterError("mass iteration hit maxit without a stationary point");
  }
  return scdf;
}

StepCDF np_fit(const Dataset& d, double tol, int maxit, EmDiagnostics* diag) {
  return em_fit(d, turnbull_intervals(d), tol, maxit, diag);
}

double np_loglik(const Dataset& d, const TurnbullIntervals& iv,
                 const std::vector<double>& masses) {
  EmState st;
  st.mem = membership(d, iv);
  for (const auto& r : d.records) st.w.push_back(r.weight);
  return loglik_from_masses(st, masses);
}

KktReport kkt_check(const StepCDF& scdf, const Dataset& d, double tol) {
  const std::size_t m = scdf.intervals.size();
  const auto mem = membership(d, scdf.intervals);
  std::vector<double> prefix(m + 1, 0.0);
  std::partial_sum(scdf.masses.begin(), scdf.masses.end(), prefix.begin() + 1);

  std::vector<double> grad_a(m + 1, 0.0), grad_b(m + 1, 0.0);
  double total_w = 0.0;
  for (std::size_t i = 0; i < mem.size(); ++i) {
    const auto& mr = mem[i];
    const double w = d.records[i].weight;
    total_w += w;
    const double ai = record_alpha_mass(prefix, mr);
    const double bi = record_beta_mass(prefix, mr);
    if (!(ai > 0.0) || !(bi > 0.0)) {
      KktReport rep;
      rep.ok = false;
      rep.max_violation = kInf;
      rep.violating.push_back(i);
      return rep;
    }
    grad_a[mr.alpha_lo] += w / ai;
    grad_a[mr.alpha_hi + 1] -= w / ai;
    grad_b[mr.beta_lo] += w / bi;
    grad_b[mr.beta_hi + 1] -= w / bi;
    if (mr.has_beta2()) {
      grad_b[mr.beta2_lo] += w / bi;
      grad_b[mr.beta2_hi + 1] -= w / bi;
    }
  }

  KktReport rep;
  double ga = 0.0, gb = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    ga += grad_a[j];
    gb += grad_b[j];
    // scale-invariant likelihood, so the simplex multiplier is zero
    const double g = (ga - gb) / total_w;
    const double viol = scdf.masses[j] > 0.0 ? std::abs(g) : std::max(g, 0.0);
    if (viol > tol) {
      rep.ok = false;
      rep.violating.push_back(j);
    }
    rep.max_violation = std::max(rep.max_violation, viol);
  }
  return rep;
}

double eval_cdf(const StepCDF& scdf, double t, CdfConvention convention) {
  const auto& iv = scdf.intervals.intervals;
  double cum = 0.0;
  for (std::size_t j = 0; j < iv.size(); ++j) {
    if (t < iv[j].a) return cum;
    if (t <= iv[j].b) {
      switch (convention) {
        case CdfConvention::left: return cum;
        case CdfConvention::right: return cum + scdf.masses[j];
        case CdfConvention::interpolate: {
          const double width = iv[j].b - iv[j].a;
          if (!(width > 0.0) || !std::isfinite(width))
            return cum + scdf.masses[j];
          return cum + scdf.masses[j] * (t - iv[j].a) / width;
        }
      }
    }
    cum += scdf.masses[j];
  }
  return 1.0;
}

double eval_cdf(const StepCDF& scdf, double t) {
  return eval_cdf(scdf, t, scdf.convention);
}

double eval_quantile(const StepCDF& scdf, double q) {
  if (!(q >= 0.0) || !(q <= 1.0)) throw DomainError("quantile level outside [0, 1]");
  const auto& iv = scdf.intervals.intervals;
  double cum = 0.0;
  for (std::size_t j = 0; j < iv.size(); ++j) {
    const double next = cum + scdf.masses[j];
    if (q <= next + 1e-15 && scdf.masses[j] > 0.0) {
      const double width = iv[j].b - iv[j].a;
      if (!(width > 0.0) || !std::isfinite(width)) return iv[j].a;
      return iv[j].a + width * std::min((q - cum) / scdf.masses[j], 1.0);
    }
    cum = next;
  }
  return iv.back().b;
}

}  // namespace lifetail
