#include "lifetail/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "lifetail/errors.hpp"
#include "lifetail/gof.hpp"
#include "lifetail/inference.hpp"
#include "lifetail/likelihood.hpp"
#include "lifetail/npmle.hpp"
#include "lifetail/optim_fit.hpp"
#include "lifetail/sampling.hpp"
#include "lifetail/svg.hpp"

namespace lifetail {

namespace {

using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  char buf[4096];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
    if (!in) break;
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return out;
}

void write_json(const json& j, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << j.dump(2) << "\n";
  if (!f) throw IoError("failed writing " + path);
}

CsvSchema schema_from(const std::vector<std::string>& mappings) {
  CsvSchema schema;
  for (const auto& m : mappings) {
    const auto eq = m.find('=');
    if (eq == std::string::npos)
      throw DomainError("column mapping '" + m + "' is not canonical=header");
    schema[m.substr(0, eq)] = m.substr(eq + 1);
  }
  return schema;
}

json param_json(const ParamVector& p) {
  json j = json::object();
  const auto& specs = family_info(p.family).params;
  for (std::size_t i = 0; i < specs.size(); ++i) j[specs[i].name] = p.values[i];
  return j;
}

json fit_json(const FitResult& fr) {
  json j;
  j["family"] = family_name(fr.family);
  j["thresh"] = fr.thresh;
  j["estimates"] = param_json(fr.estimates);
  json se = json::object();
  const auto& specs = family_info(fr.family).params;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (fr.se[i].has_value())
      se[specs[i].name] = *fr.se[i];
    else
      se[specs[i].name] = nullptr;
  }
  j["se"] = se;
  j["loglik"] = fr.loglik;
  j["n_exceedances"] = fr.n_exceedances;
  j["converged"] = fr.converged;
  j["n_starts"] = fr.n_starts;
  j["boundary"] = fr.boundary;
  return j;
}

json nested_json(const NestedTestResult& t) {
  json j;
  j["sub"] = family_name(t.sub);
  j["super"] = family_name(t.super);
  j["statistic"] = t.statistic;
  j["df0"] = t.df0;
  j["mixture"] = t.mixture;
  j["pvalue"] = t.pvalue;
  j["method"] = t.method;
  return j;
}

json threshold_json(const ThresholdDiag& diag, bool score) {
  json entries = json::array();
  for (const auto& e : diag.entries) {
    json je;
    je["thresh"] = e.thresh;
    je["ok"] = e.ok;
    if (!e.ok) {
      je["message"] = e.message;
    } else if (score) {
      je["shape"] = e.shape;
      je["statistic"] = e.statistic;
      je["df"] = e.df;
      je["pvalue"] = e.pvalue;
    } else {
      je["shape"] = e.shape;
      je["lower"] = e.lower;
      je["upper"] = std::isfinite(e.upper) ? json(e.upper) : json("inf");
    }
    entries.push_back(je);
  }
  return json{{"thresholds", entries}};
}

/// Pre-expands --config <file.json> into flags; explicit flags win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string cfg_path;
  for (std::size_t i = 0; i + 1 < args.size(); ++i) {
    if (args[i] == "--config") {
      cfg_path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
  }
  if (cfg_path.empty()) return args;

  std::ifstream f(cfg_path);
  if (!f) throw IoError("cannot open config " + cfg_path);
  json cfg;
  try {
    f >> cfg;
  } catch (const json::exception& e) {
    throw ParseError("config " + cfg_path + ": " + e.what());
  }
  auto present = [&](const std::string& flag) {
    return std::find(args.begin(), args.end(), flag) != args.end();
  };
  for (const auto& [key, value] : cfg.items()) {
    const std::string flag = "--" + key;
    if (present(flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
    } else if (value.is_array()) {
      for (const auto& v : value) {
        args.push_back(flag);
        args.push_back(v.is_string() ? v.get<std::string>() : v.dump());
      }
    } else {
      args.push_back(flag);
      args.push_back(value.is_string() ? value.get<std::string>() : value.dump());
    }
  }
  return args;
}

struct Options {
  std::string data, out, svg, family, null_family, alt_family;
  std::string method = "wald", kind = "pp", group;
  std::vector<std::string> colmap;
  std::vector<double> thresholds, times, psi, params;
  double thresh = 0.0, level = 0.95, pool_min = 5.0, granularity = 1.0;
  double scale = NAN, shape = NAN, alpha = NAN, beta = NAN, nu = NAN, lambda = NAN;
  double lower = 0.0, upper = kInf, lower2 = kInf, upper2 = kInf;
  std::string scheme = "none";
  std::size_t n = 0;
  int B = 999, jobs = 0;
  std::uint64_t seed = 0;
  std::string replicates_out;
};

ParamVector build_params(const Options& o) {
  const Family fam = family_from_string(o.family);
  const auto& specs = family_info(fam).params;
  ParamVector p;
  p.family = fam;
  if (!o.params.empty()) {
    p.values = o.params;
  } else {
    for (const auto& s : specs) {
      double v = NAN;
      if (s.name == "scale") v = o.scale;
      else if (s.name == "shape") v = o.shape;
      else if (s.name == "alpha") v = o.alpha;
      else if (s.name == "beta") v = o.beta;
      else if (s.name == "nu") v = o.nu;
      else if (s.name == "lambda") v = o.lambda;
      if (std::isnan(v))
        throw DomainError("missing --" + s.name + " for family " + o.family);
      p.values.push_back(v);
    }
  }
  validate(p);
  return p;
}

json base_json(const Options& o, const json& config) {
  json j;
  j["version"] = kVersion;
  j["config"] = config;
  if (!o.data.empty()) j["input_digest"] = file_digest(o.data);
  return j;
}

void write_sample_csv(const Dataset& d, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << "time,time2,event,ltrunc,rtrunc,ltrunc2,rtrunc2,weight\n";
  auto cell = [](double v) -> std::string {
    if (v == kInf) return "inf";
    if (v == -kInf) return "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  };
  for (const auto& r : d.records)
    f << cell(r.time1) << "," << cell(r.time2) << ","
      << static_cast<int>(r.event) << "," << cell(r.ltrunc1) << ","
      << cell(r.rtrunc1) << "," << cell(r.ltrunc2) << "," << cell(r.rtrunc2)
      << "," << cell(r.weight) << "\n";
  if (!f) throw IoError("failed writing " + path);
}

int dispatch(const std::string& cmd, const Options& o, const json& config) {
#ifdef _OPENMP
  if (o.jobs > 0) omp_set_num_threads(o.jobs);
#endif
  const auto schema = schema_from(o.colmap);

  if (cmd == "fit") {
    const auto d = load_csv(o.data, schema);
    const auto fr = fit(d, family_from_string(o.family), {o.thresh});
    json j = base_json(o, config);
    j.update(fit_json(fr));
    write_json(j, o.out.empty() ? "fit.json" : o.out);
    std::cout << "loglik " << fr.loglik << "\n";
    return 0;
  }
  if (cmd == "npmle") {
    const auto d = to_exceedances(load_csv(o.data, schema), {o.thresh});
    EmDiagnostics diag;
    const auto scdf = np_fit(d, 1e-9, 100000, &diag);
    json j = base_json(o, config);
    json a = json::array(), b = json::array();
    for (const auto& iv : scdf.intervals.intervals) {
      a.push_back(iv.a);
      b.push_back(std::isfinite(iv.b) ? json(iv.b) : json("inf"));
    }
    j["a"] = a;
    j["b"] = b;
    j["p"] = scdf.masses;
    j["convention"] = "right";
    j["loglik"] = diag.loglik;
    j["iterations"] = diag.iterations;
    write_json(j, o.out.empty() ? "npmle.json" : o.out);
    if (!o.svg.empty()) emit_svg(scdf, o.svg);
    return 0;
  }
  if (cmd == "anova") {
    const auto d = load_csv(o.data, schema);
    FitOptions fo;
    fo.compute_se = false;
    const auto f0 = fit(d, family_from_string(o.null_family), {o.thresh}, {}, fo);
    const auto f1 = fit(d, family_from_string(o.alt_family), {o.thresh}, {}, fo);
    const auto t = lrt_nested(f0, f1);
    json j = base_json(o, config);
    j.update(nested_json(t));
    write_json(j, o.out.empty() ? "anova.json" : o.out);
    std::cout << "statistic " << t.statistic << " pvalue " << t.pvalue << "\n";
    return 0;
  }
  if (cmd == "tstab" || cmd == "ncscore") {
    const auto d = load_csv(o.data, schema);
    const bool score = cmd == "ncscore";
    const auto diag = score ? nc_score_test(d, o.thresholds)
                            : tstab(d, o.thresholds, o.level);
    json j = base_json(o, config);
    j.update(threshold_json(diag, score));
    write_json(j, o.out.empty() ? cmd + ".json" : o.out);
    if (!o.svg.empty()) emit_svg(diag, o.svg);
    return 0;
  }
  if (cmd == "profile-endpoint") {
    const auto d = load_csv(o.data, schema);
    const auto pc = profile_endpoint(d, {o.thresh}, o.psi, o.level);
    json j = base_json(o, config);
    j["psi"] = pc.psi;
    j["loglik"] = pc.loglik;
    j["psi_hat"] = std::isfinite(pc.psi_hat) ? json(pc.psi_hat) : json("inf");
    j["loglik_hat"] = pc.loglik_hat;
    j["level"] = pc.level;
    j["lower"] = pc.lower;
    j["upper"] = std::isfinite(pc.upper) ? json(pc.upper) : json("inf");
    j["lower_out_of_grid"] = pc.lower_out_of_grid;
    j["upper_out_of_grid"] = pc.upper_out_of_grid;
    write_json(j, o.out.empty() ? "profile.json" : o.out);
    if (!o.svg.empty()) emit_svg(pc, o.svg);
    return 0;
  }
  if (cmd == "hazard") {
    const auto d = load_csv(o.data, schema);
    const auto exc = to_exceedances(d, {o.thresh});
    const auto fr = fit_exceedances(exc, family_from_string(o.family), o.thresh);
    const auto method = o.method == "profile" ? CiMethod::profile : CiMethod::wald;
    const auto band = hazard_ci(fr, exc, o.times, method, o.level);
    std::ofstream f(o.out.empty() ? "hazard.csv" : o.out, std::ios::binary);
    if (!f) throw IoError("cannot open hazard output for writing");
    f << "t,estimate,lower,upper\n";
    char buf[160];
    for (const auto& pt : band) {
      std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g\n", pt.t, pt.estimate,
                    pt.lower, pt.upper);
      f << buf;
    }
    return 0;
  }
  if (cmd == "sample") {
    const auto p = build_params(o);
    SamplingScheme scheme;
    if (o.scheme == "ltrt") scheme.kind = SamplingKind::ltrt;
    else if (o.scheme == "ltrc") scheme.kind = SamplingKind::ltrc;
    else if (o.scheme == "ditrunc") scheme.kind = SamplingKind::ditrunc;
    else if (o.scheme != "none") throw DomainError("unknown scheme " + o.scheme);
    scheme.lower = {o.lower};
    scheme.upper = {o.upper};
    scheme.lower2 = {o.lower2};
    scheme.upper2 = {o.upper2};
    const auto d = sample_elife(o.n, p, scheme, o.seed);
    write_sample_csv(d, o.out.empty() ? "sample.csv" : o.out);
    return 0;
  }
  if (cmd == "boot-lrt") {
    const auto d = load_csv(o.data, schema);
    const auto exc = to_exceedances(d, {o.thresh});
    BootstrapLrtOptions blo;
    blo.granularity = o.granularity;
    const auto res = bootstrap_lrt(exc, family_from_string(o.null_family),
                                   family_from_string(o.alt_family), o.B, o.seed, blo);
    json j = base_json(o, config);
    j["observed"] = res.observed;
    j["pvalue"] = res.pvalue;
    j["n_failed"] = res.n_failed;
    j["failure_warning"] = res.failure_warning;
    j["B"] = o.B;
    write_json(j, o.out.empty() ? "bootlrt.json" : o.out);
    std::ofstream f(o.replicates_out.empty() ? "bootlrt_replicates.csv"
                                             : o.replicates_out,
                    std::ios::binary);
    f << "statistic\n";
    char buf[40];
    for (double s : res.replicates) {
      std::snprintf(buf, sizeof buf, "%.10g\n", s);
      f << buf;
    }
    std::cout << "pvalue " << res.pvalue << "\n";
    return 0;
  }
  if (cmd == "gof") {
    const auto d = load_csv(o.data, schema);
    const auto exc = to_exceedances(d, {o.thresh});
    FitOptions fo;
    fo.compute_se = false;
    const auto fr = fit_exceedances(exc, family_from_string(o.family), o.thresh, {}, fo);
    const auto pd = plotting_positions(fr, exc, plot_kind_from_string(o.kind), o.level);
    write_plotdata_csv(pd, o.out.empty() ? "gof.csv" : o.out);
    if (!o.svg.empty()) emit_svg(pd, o.svg);
    return 0;
  }
  if (cmd == "strata") {
    auto groups = load_csv_grouped(o.data, schema, o.group);
    std::vector<Dataset> strata;
    json labels = json::array();
    for (auto& [label, ds] : groups) {
      labels.push_back(label);
      strata.push_back(std::move(ds));
    }
    const auto t = test_strata(strata, family_from_string(o.family), {o.thresh});
    json j = base_json(o, config);
    j.update(nested_json(t));
    j["strata"] = labels;
    write_json(j, o.out.empty() ? "strata.json" : o.out);
    std::cout << "statistic " << t.statistic << " pvalue " << t.pvalue << "\n";
    return 0;
  }
  if (cmd == "chisq-gof") {
    const auto d = load_csv(o.data, schema);
    const auto exc = to_exceedances(d, {o.thresh});
    FitOptions fo;
    fo.compute_se = false;
    const auto fr = fit_exceedances(exc, family_from_string(o.family), o.thresh, {}, fo);
    const auto res = chisq_gof(exc, fr, o.pool_min, o.B, o.seed);
    json j = base_json(o, config);
    j["statistic"] = res.statistic;
    j["pvalue"] = res.pvalue;
    j["n_rows"] = res.n_rows;
    j["n_cols"] = res.n_cols;
    j["n_replicates"] = res.n_replicates;
    j["n_failed"] = res.n_failed;
    write_json(j, o.out.empty() ? "chisqgof.json" : o.out);
    std::cout << "pvalue " << res.pvalue << "\n";
    return 0;
  }
  throw DomainError("no subcommand given; see --help");
}

}  // namespace

int run(int argc, const char* const* argv) {
  Options o;
  CLI::App app{"Likelihood tools for censored and truncated lifetime data"};
  app.require_subcommand(0, 1);

  auto add_common = [&](CLI::App* sub, bool needs_data) {
    auto* d = sub->add_option("--data", o.data, "input CSV");
    if (needs_data) d->required();
    sub->add_option("--col", o.colmap, "column mapping canonical=header");
    sub->add_option("--out", o.out, "output path");
    sub->add_option("--jobs", o.jobs, "worker thread count");
  };

  auto* c_fit = app.add_subcommand("fit", "maximum likelihood fit");
  add_common(c_fit, true);
  c_fit->add_option("--family", o.family)->required();
  c_fit->add_option("--thresh", o.thresh);

  auto* c_np = app.add_subcommand("npmle", "nonparametric distribution estimate");
  add_common(c_np, true);
  c_np->add_option("--thresh", o.thresh);
  c_np->add_option("--svg", o.svg);

  auto* c_anova = app.add_subcommand("anova", "nested likelihood ratio test");
  add_common(c_anova, true);
  c_anova->add_option("--null", o.null_family)->required();
  c_anova->add_option("--alt", o.alt_family)->required();
  c_anova->add_option("--thresh", o.thresh);

  auto* c_tstab = app.add_subcommand("tstab", "shape stability by threshold");
  add_common(c_tstab, true);
  c_tstab->add_option("--thresholds", o.thresholds)->required()->expected(-1);
  c_tstab->add_option("--level", o.level);
  c_tstab->add_option("--svg", o.svg);

  auto* c_nc = app.add_subcommand("ncscore", "score tests of constant shape");
  add_common(c_nc, true);
  c_nc->add_option("--thresholds", o.thresholds)->required()->expected(-1);
  c_nc->add_option("--svg", o.svg);

  auto* c_prof = app.add_subcommand("profile-endpoint", "endpoint profile likelihood");
  add_common(c_prof, true);
  c_prof->add_option("--thresh", o.thresh);
  c_prof->add_option("--psi", o.psi)->expected(-1);
  c_prof->add_option("--level", o.level);
  c_prof->add_option("--svg", o.svg);

  auto* c_haz = app.add_subcommand("hazard", "pointwise hazard bands");
  add_common(c_haz, true);
  c_haz->add_option("--family", o.family)->required();
  c_haz->add_option("--thresh", o.thresh);
  c_haz->add_option("--times", o.times)->required()->expected(-1);
  c_haz->add_option("--method", o.method)->check(CLI::IsMember({"wald", "profile"}));
  c_haz->add_option("--level", o.level);

  auto* c_sample = app.add_subcommand("sample", "draw simulated lifetimes");
  add_common(c_sample, false);
  c_sample->add_option("--family", o.family)->required();
  c_sample->add_option("--n", o.n)->required();
  c_sample->add_option("--seed", o.seed)->required();
  c_sample->add_option("--params", o.params)->expected(-1);
  c_sample->add_option("--scale", o.scale);
  c_sample->add_option("--shape", o.shape);
  c_sample->add_option("--alpha", o.alpha);
  c_sample->add_option("--beta", o.beta);
  c_sample->add_option("--nu", o.nu);
  c_sample->add_option("--lambda", o.lambda);
  c_sample->add_option("--scheme", o.scheme)
      ->check(CLI::IsMember({"none", "ltrt", "ltrc", "ditrunc"}));
  c_sample->add_option("--lower", o.lower);
  c_sample->add_option("--upper", o.upper);
  c_sample->add_option("--lower2", o.lower2);
  c_sample->add_option("--upper2", o.upper2);

  auto* c_boot = app.add_subcommand("boot-lrt", "parametric bootstrap deviance test");
  add_common(c_boot, true);
  c_boot->add_option("--null", o.null_family)->required();
  c_boot->add_option("--alt", o.alt_family)->required();
  c_boot->add_option("--thresh", o.thresh);
  c_boot->add_option("--B", o.B);
  c_boot->add_option("--seed", o.seed)->required();
  c_boot->add_option("--granularity", o.granularity);
  c_boot->add_option("--replicates", o.replicates_out);

  auto* c_gof = app.add_subcommand("gof", "diagnostic plotting positions");
  add_common(c_gof, true);
  c_gof->add_option("--family", o.family)->required();
  c_gof->add_option("--thresh", o.thresh);
  c_gof->add_option("--kind", o.kind)
      ->check(CLI::IsMember({"pp", "qq", "tmd", "exp", "erp"}));
  c_gof->add_option("--level", o.level);
  c_gof->add_option("--svg", o.svg);

  auto* c_strata = app.add_subcommand("strata", "common-parameter test across strata");
  add_common(c_strata, true);
  c_strata->add_option("--family", o.family)->required();
  c_strata->add_option("--thresh", o.thresh);
  c_strata->add_option("--group", o.group, "label column defining the strata")
      ->required();

  auto* c_chisq = app.add_subcommand("chisq-gof", "bootstrap contingency test");
  add_common(c_chisq, true);
  c_chisq->add_option("--family", o.family)->required();
  c_chisq->add_option("--thresh", o.thresh);
  c_chisq->add_option("--pool-min", o.pool_min);
  c_chisq->add_option("--B", o.B);
  c_chisq->add_option("--seed", o.seed)->required();

  std::vector<std::string> raw;
  for (int i = 1; i < argc; ++i) raw.emplace_back(argv[i]);
  try {
    raw = expand_config(raw);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  // CLI11 consumes arguments in reverse order
  std::vector<std::string> rev(raw.rbegin(), raw.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  const auto subs = app.get_subcommands();
  if (subs.empty()) {
    std::cerr << app.help();
    return 2;
  }

  // resolved configuration, embedded in JSON outputs for provenance
  json config = json::object();
  config["subcommand"] = subs[0]->get_name();
  for (const auto* opt : subs[0]->get_options()) {
    if (opt->count() == 0) continue;
    const auto& results = opt->results();
    if (results.size() == 1)
      config[opt->get_lnames()[0]] = results[0];
    else
      config[opt->get_lnames()[0]] = results;
  }

  try {
    return dispatch(subs[0]->get_name(), o, config);
  } catch (const NonConvergenceError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const SingularInformationError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const MaxIterError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const GridTooNarrowError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const ZeroMassError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace lifetail
