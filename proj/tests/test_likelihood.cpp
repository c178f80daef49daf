#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "lifetail/data_model.hpp"
#include "lifetail/errors.hpp"
#include "lifetail/likelihood.hpp"

using namespace lifetail;

namespace {

LifetimeRecord rec(double t1, double t2, Event e, double lt = -kInf,
                   double rt = kInf, double w = 1.0) {
  LifetimeRecord r;
  r.time1 = t1;
  r.time2 = t2;
  r.event = e;
  r.ltrunc1 = lt;
  r.rtrunc1 = rt;
  r.weight = w;
  return r;
}

Dataset random_dataset(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> ex(0.7);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = ex(rng);
    const double u = unif(rng);
    if (u < 0.4) {
      d.records.push_back(rec(t, t, Event::observed));
    } else if (u < 0.6) {
      d.records.push_back(rec(t, kInf, Event::right_censored));
    } else if (u < 0.8) {
      d.records.push_back(rec(-kInf, t + 0.1, Event::left_censored));
    } else {
      d.records.push_back(rec(t, t + 0.5, Event::interval_censored));
    }
    d.records.back().weight = 1.0 + unif(rng);
  }
  return d;
}

}  // namespace

TEST_SUITE("likelihood") {

TEST_CASE("single exact observation under the unit exponential") {
  Dataset d;
  d.records.push_back(rec(1.0, 1.0, Event::observed));
  const ParamVector p{Family::exp, {1.0}, {}};
  CHECK(loglik(d, p) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("interval-censored right-truncated cell has the closed form") {
  Dataset d;
  d.records.push_back(rec(0.0, 1.0, Event::interval_censored, -kInf, 2.0));
  const ParamVector p{Family::exp, {1.0}, {}};
  const double expected =
      std::log(-std::expm1(-1.0)) - std::log(-std::expm1(-2.0));
  CHECK(loglik(d, p) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("weight splitting leaves the total unchanged") {
  auto d = random_dataset(60, 5);
  const ParamVector p{Family::gomp, {1.2, 0.4}, {}};
  const double base = loglik(d, p);
  Dataset split;
  for (const auto& r : d.records) {
    auto half = r;
    half.weight = r.weight / 2.0;
    split.records.push_back(half);
    split.records.push_back(half);
  }
  CHECK(loglik(split, p) == doctest::Approx(base).epsilon(1e-10));
}

TEST_CASE("degenerate truncation bounds reproduce the plain likelihood") {
  auto d = random_dataset(60, 6);
  const ParamVector p{Family::weibull, {1.5, 1.3}, {}};
  const double base = loglik(d, p);
  for (auto& r : d.records) {
    r.ltrunc1 = 0.0;
    r.rtrunc1 = kInf;
  }
  CHECK(loglik(d, p) == base);
}

TEST_CASE("record order does not matter") {
  auto d = random_dataset(100, 9);
  const ParamVector p{Family::gp, {1.0, 0.2}, {}};
  const double base = loglik(d, p);
  std::mt19937_64 rng(17);
  std::shuffle(d.records.begin(), d.records.end(), rng);
  CHECK(loglik(d, p) == doctest::Approx(base).epsilon(1e-13));
}

TEST_CASE("parallel and serial evaluation agree exactly") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto d = random_dataset(257, seed);
    for (const ParamVector& p :
         {ParamVector{Family::exp, {1.4}, {}}, ParamVector{Family::gomp, {1.0, 0.3}, {}},
          ParamVector{Family::gp, {2.0, -0.1}, {}}}) {
      CHECK(loglik(d, p) == loglik_serial(d, p));
    }
  }
}

TEST_CASE("zero-probability cells give negative infinity") {
  Dataset d;
  d.records.push_back(rec(3.0, 3.0, Event::observed));
  const ParamVector p{Family::gp, {1.0, -0.5}, {}};  // support ends at 2
  CHECK(loglik(d, p) == -kInf);
  CHECK(std::isinf(deviance(d, p)));

  Dataset e;
  e.records.push_back(rec(500.0, 501.0, Event::interval_censored));
  CHECK(loglik(e, ParamVector{Family::exp, {0.5}, {}}) == -kInf);
}

TEST_CASE("double truncation sums the two window masses") {
  Dataset d;
  LifetimeRecord r = rec(5.5, 5.5, Event::observed, 5.0, 6.0);
  r.ltrunc2 = 8.0;
  r.rtrunc2 = 9.0;
  d.records.push_back(r);
  const ParamVector p{Family::exp, {2.0}, {}};
  auto F = [&](double t) { return 1.0 - std::exp(-t / 2.0); };
  const double expected = -5.5 / 2.0 - std::log(2.0) -
                          std::log(F(6.0) - F(5.0) + F(9.0) - F(8.0));
  CHECK(loglik(d, p) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("deviance is minus twice the log likelihood") {
  const auto d = random_dataset(40, 21);
  const ParamVector p{Family::exp, {1.1}, {}};
  CHECK(deviance(d, p) == doctest::Approx(-2.0 * loglik(d, p)).epsilon(1e-14));
}

TEST_CASE("pairwise summation matches plain summation") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<double> x(1000);
  long double total = 0.0;
  for (auto& v : x) total += (v = unif(rng));
  CHECK(pairwise_sum(x) ==
        doctest::Approx(static_cast<double>(total)).epsilon(1e-13));
  CHECK(pairwise_sum({}) == 0.0);
}

TEST_CASE("contributions align with records and sum to the total") {
  const auto d = random_dataset(33, 8);
  const ParamVector p{Family::gomp, {1.0, 0.5}, {}};
  const auto c = loglik_contributions(d, p);
  REQUIRE(c.size() == d.size());
  CHECK(pairwise_sum(c) == loglik(d, p));
}

}  // TEST_SUITE
