#include "lifetail/nesting.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>

namespace lifetail {

namespace {

using P = std::vector<double>;

std::vector<NestingEdge> build_edges() {
  std::vector<NestingEdge> e;
  auto add = [&](Family sub, Family super, int interior, int boundary,
                 std::function<P(const P&)> embed, bool allowed = true) {
    e.push_back({sub, super, interior, boundary, allowed, std::move(embed)});
  };

  add(Family::exp, Family::gomp, 0, 1, [](const P& s) { return P{s[0], 1e-2}; });
  add(Family::exp, Family::gp, 1, 0, [](const P& s) { return P{s[0], 0.0}; });
  add(Family::exp, Family::weibull, 1, 0, [](const P& s) { return P{s[0], 1.0}; });
  add(Family::exp, Family::extgp, 1, 1,
      [](const P& s) { return P{s[0], 1e-2, 0.0}; });
  add(Family::exp, Family::extweibull, 2, 0,
      [](const P& s) { return P{s[0], 1.0, 0.0}; });
  add(Family::gomp, Family::extgp, 1, 0,
      [](const P& s) { return P{s[0], s[1], 0.0}; });
  add(Family::gp, Family::extgp, 0, 1,
      [](const P& s) { return P{s[0], 1e-3, s[1]}; });
  add(Family::gp, Family::extweibull, 1, 0,
      [](const P& s) { return P{s[0], 1.0, s[1]}; });
  add(Family::weibull, Family::extweibull, 1, 0,
      [](const P& s) { return P{s[0], s[1], 0.0}; });
  add(Family::gomp, Family::gompmake, 0, 1,
      [](const P& s) { return P{s[0], s[1], 1e-6}; });
  add(Family::perks, Family::beard, 1, 0,
      [](const P& s) { return P{s[0], s[1], 1.0}; });
  add(Family::gomp, Family::beard, 0, 1,
      [](const P& s) { return P{1.0 / s[0], s[1] / s[0], 1e-8}; });
  add(Family::perks, Family::perksmake, 0, 1,
      [](const P& s) { return P{s[0], s[1], 1e-6}; });
  add(Family::beard, Family::beardmake, 0, 1,
      [](const P& s) { return P{s[0], s[1], s[2], 1e-6}; });
  add(Family::gomp, Family::beardmake, 0, 2,
      [](const P& s) { return P{1.0 / s[0], s[1] / s[0], 1e-8, 1e-6}; });
  add(Family::gompmake, Family::beardmake, 0, 1,
      [](const P& s) { return P{1.0 / s[0], s[1] / s[0], 1e-8, s[2]}; });
  add(Family::perks, Family::beardmake, 1, 1,
      [](const P& s) { return P{s[0], s[1], 1.0, 1e-6}; });
  add(Family::perksmake, Family::beardmake, 1, 0,
      [](const P& s) { return P{s[0], s[1], 1.0, s[2]}; });

  // Nonidentifiable as nu -> 0: the information matrix is singular.
  add(Family::exp, Family::gompmake, 0, 2, nullptr, false);
  add(Family::exp, Family::perksmake, 0, 2, nullptr, false);
  add(Family::exp, Family::beardmake, 0, 3, nullptr, false);
  return e;
}

}  // namespace

const std::vector<NestingEdge>& nesting_edges() {
  static const std::vector<NestingEdge> edges = build_edges();
  return edges;
}

const NestingEdge* find_edge(Family sub, Family super) {
  for (const auto& e : nesting_edges())
    if (e.sub == sub && e.super == super) return &e;
  return nullptr;
}

std::vector<const NestingEdge*> direct_subs(Family f) {
  std::vector<const NestingEdge*> out;
  for (const auto& e : nesting_edges())
    if (e.super == f && e.allowed) out.push_back(&e);
  return out;
}

std::vector<double> chibar_weights(const NestingEdge& e) {
  const int b = e.boundary;
  std::vector<double> w(static_cast<std::size_t>(b) + 1);
  double binom = 1.0;
  for (int k = 0; k <= b; ++k) {
    w[static_cast<std::size_t>(k)] = binom / std::pow(2.0, b);
    binom = binom * (b - k) / (k + 1.0);
  }
  return w;
}

double chibar_pvalue(const NestingEdge& e, double statistic) {
  const double s = std::max(statistic, 0.0);
  const auto w = chibar_weights(e);
  double p = 0.0;
  for (int k = 0; k <= e.boundary; ++k) {
    const int df = e.interior + k;
    if (df == 0) continue;  // point mass at zero has no upper tail
    boost::math::chi_squared dist(df);
    p += w[static_cast<std::size_t>(k)] * boost::math::cdf(boost::math::complement(dist, s));
  }
  return p;
}

}  // namespace lifetail
