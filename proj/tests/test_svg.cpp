#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "lifetail/data_model.hpp"
#include "lifetail/errors.hpp"
#include "lifetail/gof.hpp"
#include "lifetail/inference.hpp"
#include "lifetail/npmle.hpp"
#include "lifetail/optim_fit.hpp"
#include "lifetail/sampling.hpp"
#include "lifetail/svg.hpp"

using namespace lifetail;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Dataset toy_sample() {
  return sample_elife(80, {Family::gp, {1.0, -0.4}, {}},
                      SamplingScheme::none_scheme(), 7);
}

}  // namespace

TEST_SUITE("svg") {

TEST_CASE("plot scatter renders and is byte deterministic") {
  const auto d = toy_sample();
  const auto fr = fit_exceedances(d, Family::gp);
  const auto pd = plotting_positions(fr, d, PlotKind::qq);
  const std::string path = "/tmp/lifetail_test_qq.svg";
  emit_svg(pd, path);
  const auto first = slurp(path);
  CHECK(first.rfind("<svg", 0) == 0);
  CHECK(first.find("viewBox=\"0 0 640 480\"") != std::string::npos);
  CHECK(first.find("<circle") != std::string::npos);
  CHECK(first.find("</svg>") != std::string::npos);
  emit_svg(pd, path);
  CHECK(slurp(path) == first);
  std::remove(path.c_str());
}

TEST_CASE("difference plots carry a horizontal reference line") {
  const auto d = toy_sample();
  const auto fr = fit_exceedances(d, Family::gp);
  const auto pd = plotting_positions(fr, d, PlotKind::tmd);
  const std::string path = "/tmp/lifetail_test_tmd.svg";
  emit_svg(pd, path);
  CHECK(slurp(path).find("<line") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("distribution steps render") {
  Dataset d;
  for (double t : {1.0, 1.0, 2.0, 3.0}) {
    LifetimeRecord r;
    r.time1 = r.time2 = t;
    d.records.push_back(r);
  }
  const auto est = np_fit(d);
  const std::string path = "/tmp/lifetail_test_cdf.svg";
  emit_svg(est, path);
  const auto body = slurp(path);
  CHECK(body.rfind("<svg", 0) == 0);
  CHECK(body.find("</svg>") != std::string::npos);
  emit_svg(est, path);
  CHECK(slurp(path) == body);
  std::remove(path.c_str());
}

TEST_CASE("profile curve renders with the cutoff") {
  const auto d = sample_elife(500, {Family::gp, {1.0, -0.5}, {}},
                              SamplingScheme::none_scheme(), 11);
  const auto pc = profile_endpoint(d, {0.0});
  const std::string path = "/tmp/lifetail_test_prof.svg";
  emit_svg(pc, path);
  const auto body = slurp(path);
  CHECK(body.rfind("<svg", 0) == 0);
  CHECK(body.find("dash") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("threshold diagnostic renders whiskers") {
  const auto d = sample_elife(1500, {Family::gp, {1.0, -0.2}, {}},
                              SamplingScheme::none_scheme(), 13);
  const auto diag = tstab(d, {0.0, 0.3, 0.6});
  const std::string path = "/tmp/lifetail_test_tstab.svg";
  emit_svg(diag, path);
  const auto body = slurp(path);
  CHECK(body.rfind("<svg", 0) == 0);
  CHECK(body.find("<line") != std::string::npos);
  std::remove(path.c_str());
}

TEST_CASE("plot coordinates export as csv") {
  const auto d = toy_sample();
  const auto fr = fit_exceedances(d, Family::gp);
  const auto pd = plotting_positions(fr, d, PlotKind::pp);
  const std::string path = "/tmp/lifetail_test_pp.csv";
  write_plotdata_csv(pd, path);
  std::ifstream in(path);
  std::string header;
  REQUIRE(std::getline(in, header));
  CHECK(header == "x,y,band_x,band_lower,band_upper");
  std::size_t rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == pd.x.size());
  std::remove(path.c_str());
}

TEST_CASE("unwritable paths raise an io error") {
  const auto d = toy_sample();
  const auto fr = fit_exceedances(d, Family::gp);
  const auto pd = plotting_positions(fr, d, PlotKind::pp);
  CHECK_THROWS_AS(emit_svg(pd, "/nonexistent_dir_000/x.svg"), IoError);
  CHECK_THROWS_AS(write_plotdata_csv(pd, "/nonexistent_dir_000/x.csv"), IoError);
}

}  // TEST_SUITE
