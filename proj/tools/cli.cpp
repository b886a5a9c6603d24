#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <utility>

#include "CLI11.hpp"
#include "json.hpp"
#include "sdnet/eval.hpp"
#include "sdnet/io.hpp"
#include "sdnet/rolling.hpp"

namespace sdnet::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::pair<const char*, const char*> kCommands[] = {
    {"simulate", "Simulate a network or run a Monte Carlo experiment"},
    {"estimate", "Fit a model to an edge list or to Poisson margins"},
    {"filter", "Run the score-driven filter with a saved fit"},
    {"forecast", "Rolling one-step-ahead forecasts"},
    {"evaluate", "Metrics and Diebold-Mariano tests for forecast files"}};
const char* const kModels[] = {"sd", "ss-ar1", "constant", "nofitness", "zareg"};

// ---------------------------------------------------------------- config

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError("field '" + where + "' must be an object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) throw ConfigError("unknown field '" + (where.empty() ? k : where + "." + k) + "'");
  }
}

std::string join(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

template <typename T>
void read(const json& j, const std::string& where, const char* key, T& dst) {
  if (!j.contains(key)) return;
  try {
    dst = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("field '" + join(where, key) + "' has the wrong type");
  }
}

template <typename T, typename Parse>
void read_enum(const json& j, const std::string& where, const char* key, T& dst, Parse parse) {
  if (!j.contains(key)) return;
  std::string s;
  read(j, where, key, s);
  try {
    dst = parse(s);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("field '" + join(where, key) + "': " + e.what());
  }
}

template <typename T>
void read_positive(const json& j, const std::string& where, const char* key, T& dst) {
  read(j, where, key, dst);
  if (j.contains(key) && !(dst > 0))
    throw ConfigError("field '" + join(where, key) + "' must be positive");
}

void read_array4(const json& j, const std::string& where, const char* key,
                 std::array<double, 4>& dst) {
  if (!j.contains(key)) return;
  std::vector<double> v;
  read(j, where, key, v);
  if (v.size() != 4)
    throw ConfigError("field '" + join(where, key) + "' must hold 4 numbers");
  std::copy(v.begin(), v.end(), dst.begin());
}

// A covariate is either a derived lag covariate or a CSV file.
struct CovSpec {
  std::string derived;
  std::string path;
  std::string name;

  bool empty() const { return derived.empty() && path.empty(); }
};

CovSpec read_cov(const json& j, const std::string& where, const fs::path& base) {
  CovSpec c;
  if (j.is_string()) {
    c.derived = j.get<std::string>();
    if (c.derived != "lag-indicator" && c.derived != "lag-logweight")
      throw ConfigError("field '" + where + "' must be lag-indicator, lag-logweight or a file");
    return c;
  }
  check_keys(j, where, {"path", "name"});
  read(j, where, "path", c.path);
  read(j, where, "name", c.name);
  if (c.path.empty()) throw ConfigError("field '" + where + ".path' is required");
  c.path = (base / c.path).string();
  if (c.name.empty()) c.name = fs::path(c.path).stem().string();
  return c;
}

struct RunConfig {
  json effective;
  std::uint64_t seed = 1;
  int threads = 1;

  std::string edges;
  std::string margins;
  std::size_t n_times = 0;
  int n_nodes = 0;
  CovSpec binary_cov;
  CovSpec weight_cov;

  std::string model = "sd";
  WeightFamily family = WeightFamily::gamma;
  SdFitConfig sd;
  StaticFitConfig stat;

  std::optional<int> experiment;
  int n_reps = 10;
  json dgp = json::object();
  std::string preset;

  RollingConfig rolling;

  std::map<std::string, std::string> forecast_files;
  std::string reference = "ss-ar1";
  int horizon = 1;
  int support_bins = 10;
  bool per_time_auc = false;

  std::string fit_path;
};

RunConfig load_config(const Options& opts) {
  RunConfig rc;
  json j = json::object();
  fs::path base = fs::current_path();
  if (!opts.config_path.empty()) {
    std::ifstream in(opts.config_path);
    if (!in) throw ConfigError("cannot open config '" + opts.config_path + "'");
    try {
      j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    base = fs::absolute(opts.config_path).parent_path();
  }
  check_keys(j, "", {"seed", "threads", "data", "model", "simulate", "forecast", "evaluate",
                     "filter"});
  read(j, "", "seed", rc.seed);
  read_positive(j, "", "threads", rc.threads);

  const json data = j.value("data", json::object());
  check_keys(data, "data",
             {"edges", "margins", "n_times", "n_nodes", "binary_covariate", "weight_covariate"});
  read(data, "data", "edges", rc.edges);
  read(data, "data", "margins", rc.margins);
  read(data, "data", "n_times", rc.n_times);
  read(data, "data", "n_nodes", rc.n_nodes);
  if (!rc.edges.empty()) rc.edges = (base / rc.edges).string();
  if (!rc.margins.empty()) rc.margins = (base / rc.margins).string();
  if (data.contains("binary_covariate"))
    rc.binary_cov = read_cov(data["binary_covariate"], "data.binary_covariate", base);
  if (data.contains("weight_covariate"))
    rc.weight_cov = read_cov(data["weight_covariate"], "data.weight_covariate", base);

  const json model = j.value("model", json::object());
  check_keys(model, "model",
             {"kind", "family", "tie_mode", "parts", "scaling_power", "curvature", "init_window",
              "init_ridge", "std_errors", "node_specific_beta", "max_iters"});
  read(model, "model", "kind", rc.model);
  read_enum(model, "model", "family", rc.family, parse_family);
  read_enum(model, "model", "tie_mode", rc.sd.tie_mode, parse_tie_mode);
  read_enum(model, "model", "parts", rc.sd.parts, parse_parts);
  read_enum(model, "model", "curvature", rc.sd.curvature, parse_curvature);
  read_positive(model, "model", "scaling_power", rc.sd.scaling_power);
  read_positive(model, "model", "init_window", rc.sd.init_window);
  read(model, "model", "init_ridge", rc.sd.init_ridge);
  read(model, "model", "std_errors", rc.sd.std_errors);
  read(model, "model", "node_specific_beta", rc.sd.node_specific_beta);
  read_positive(model, "model", "max_iters", rc.sd.optim.max_iters);

  const json sim = j.value("simulate", json::object());
  check_keys(sim, "simulate", {"experiment", "n_reps", "preset", "dgp"});
  if (sim.contains("experiment")) {
    int e = 0;
    read(sim, "simulate", "experiment", e);
    if (e < 1 || e > 3) throw ConfigError("field 'simulate.experiment' must be 1, 2 or 3");
    rc.experiment = e;
  }
  read_positive(sim, "simulate", "n_reps", rc.n_reps);
  read(sim, "simulate", "preset", rc.preset);
  if (!rc.preset.empty() && rc.preset != "emid-like")
    throw ConfigError("field 'simulate.preset' must be emid-like");
  if (sim.contains("dgp")) rc.dgp = sim["dgp"];

  const json fc = j.value("forecast", json::object());
  check_keys(fc, "forecast", {"window", "models", "refit_every", "last_origin"});
  read_positive(fc, "forecast", "window", rc.rolling.window);
  read_positive(fc, "forecast", "refit_every", rc.rolling.refit_every);
  read(fc, "forecast", "last_origin", rc.rolling.last_origin);
  if (fc.contains("models")) {
    std::vector<std::string> names;
    read(fc, "forecast", "models", names);
    rc.rolling.models.clear();
    for (const auto& n : names) {
      try {
        rc.rolling.models.push_back(parse_forecast_model(n));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("field 'forecast.models': ") + e.what());
      }
    }
  }

  const json ev = j.value("evaluate", json::object());
  check_keys(ev, "evaluate", {"forecasts", "reference", "horizon", "support_bins", "per_time_auc"});
  if (ev.contains("forecasts")) {
    std::map<std::string, std::string> files;
    read(ev, "evaluate", "forecasts", files);
    for (const auto& [m, p] : files) {
      try {
        parse_forecast_model(m);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("field 'evaluate.forecasts': ") + e.what());
      }
      rc.forecast_files[m] = (base / p).string();
    }
  }
  read(ev, "evaluate", "reference", rc.reference);
  read_positive(ev, "evaluate", "horizon", rc.horizon);
  read_positive(ev, "evaluate", "support_bins", rc.support_bins);
  read(ev, "evaluate", "per_time_auc", rc.per_time_auc);

  const json flt = j.value("filter", json::object());
  check_keys(flt, "filter", {"fit"});
  read(flt, "filter", "fit", rc.fit_path);
  if (!rc.fit_path.empty()) rc.fit_path = (base / rc.fit_path).string();

  // command line overrides
  json cli = json::object();
  if (opts.seed) {
    rc.seed = *opts.seed;
    cli["seed"] = *opts.seed;
  }
  if (opts.threads) {
    if (*opts.threads < 1) throw ConfigError("--threads must be positive");
    rc.threads = *opts.threads;
  }
  if (opts.window) {
    if (*opts.window < 2) throw ConfigError("--window must be >= 2");
    rc.rolling.window = *opts.window;
    cli["window"] = *opts.window;
  }
  if (opts.family) {
    try {
      rc.family = parse_family(*opts.family);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("--family: ") + e.what());
    }
    cli["family"] = *opts.family;
  }
  if (!opts.models.empty()) {
    rc.rolling.models.clear();
    for (const auto& m : opts.models) {
      try {
        rc.rolling.models.push_back(parse_forecast_model(m));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("--model: ") + e.what());
      }
    }
    rc.model = opts.models.front();
    cli["models"] = opts.models;
  }
  rc.sd.family = rc.family;
  rc.stat.family = rc.family;
  rc.rolling.family = rc.family;
  rc.rolling.sd = rc.sd;
  rc.rolling.threads = rc.threads;
  if (!rc.reference.empty()) {
    try {
      parse_forecast_model(rc.reference);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("field 'evaluate.reference': ") + e.what());
    }
  }

  j.erase("threads");
  rc.effective = {{"config", j}, {"command", opts.command}, {"overrides", cli}};
  return rc;
}

void apply_dgp(const json& d, DgpSpec& spec) {
  const std::string w = "simulate.dgp";
  check_keys(d, w,
             {"kind", "n_nodes", "n_times", "targets", "level_spread", "ar1_b1", "noise_sd",
              "sin_amplitude", "sin_period", "sd_b", "sd_a", "beta_bin", "beta_w", "beta2_bin",
              "beta2_w", "covariates", "covariate", "family", "sigma"});
  read_enum(d, w, "kind", spec.kind, parse_dgp_kind);
  read(d, w, "n_nodes", spec.n_nodes);
  read(d, w, "n_times", spec.n_times);
  read_array4(d, w, "targets", spec.targets);
  read(d, w, "level_spread", spec.level_spread);
  read(d, w, "ar1_b1", spec.ar1_b1);
  read(d, w, "noise_sd", spec.noise_sd);
  read(d, w, "sin_amplitude", spec.sin_amplitude);
  read(d, w, "sin_period", spec.sin_period);
  read_array4(d, w, "sd_b", spec.sd_b);
  read_array4(d, w, "sd_a", spec.sd_a);
  read(d, w, "beta_bin", spec.beta_bin);
  read(d, w, "beta_w", spec.beta_w);
  read(d, w, "beta2_bin", spec.beta2_bin);
  read(d, w, "beta2_w", spec.beta2_w);
  read(d, w, "covariates", spec.covariates);
  read_enum(d, w, "family", spec.family, parse_family);
  read(d, w, "sigma", spec.sigma);
  if (d.contains("covariate")) {
    const auto& c = d["covariate"];
    check_keys(c, w + ".covariate", {"mean", "b1", "noise_sd"});
    read(c, w + ".covariate", "mean", spec.covariate.mean);
    read(c, w + ".covariate", "b1", spec.covariate.b1);
    read(c, w + ".covariate", "noise_sd", spec.covariate.noise_sd);
  }
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("field 'simulate.dgp': ") + e.what());
  }
}

// ---------------------------------------------------------------- output

class Output {
 public:
  Output(const std::string& dir, const RunConfig& rc, std::ostream& log) : dir_(dir), log_(log) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw DataError("cannot create output directory '" + dir + "': " + ec.message());
    stamp_.config_hash = hex64(fnv1a(rc.effective.dump()));
    stamp_.seed = rc.seed;
  }

  const FileStamp& stamp() const { return stamp_; }

  template <typename Fn>
  void write(const std::string& name, Fn&& fn) {
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    fn(out);
    if (!out) throw DataError("failed writing '" + path.string() + "'");
    log_ << "wrote " << path.string() << "\n";
  }

  void text(const std::string& name, const std::string& body, bool stamped) {
    write(name, [&](std::ostream& out) {
      if (stamped) out << stamp_.line() << "\n";
      out << body;
    });
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

 private:
  fs::path dir_;
  std::ostream& log_;
  FileStamp stamp_;
};

std::string stamped_json(const FileStamp& stamp, json j) {
  j["tool"] = "sdnet " SDNET_VERSION;
  j["config_hash"] = stamp.config_hash;
  j["seed"] = stamp.seed;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------- data

struct Data {
  TemporalNetwork net;
  ModelCovariates cov;
};

CovariateSet load_cov(const CovSpec& spec, const TemporalNetwork& net) {
  if (spec.empty()) return CovariateSet::none(net.n_times());
  if (spec.derived == "lag-indicator") return lag_indicator_covariate(net);
  if (spec.derived == "lag-logweight") return lag_logweight_covariate(net);
  return read_covariate_file(spec.path, spec.name, net);
}

Data load_data(const RunConfig& rc) {
  if (rc.edges.empty()) throw ConfigError("field 'data.edges' is required");
  if (!fs::exists(rc.edges)) throw DataError("missing file '" + rc.edges + "'");
  Data d;
  d.net = read_edge_list_file(rc.edges, rc.n_times, rc.n_nodes);
  if (rc.n_times && d.net.n_times() != rc.n_times)
    throw DataError("field 'data.n_times' is " + std::to_string(rc.n_times) +
                    " but the edge list reaches t=" + std::to_string(d.net.n_times() - 1));
  if (rc.n_nodes && d.net.n_nodes() > rc.n_nodes)
    throw DataError("edge list has more nodes than 'data.n_nodes'");
  d.cov.binary = load_cov(rc.binary_cov, d.net);
  d.cov.weight = load_cov(rc.weight_cov, d.net);
  return d;
}

void log_warnings(std::ostream& log, const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) log << "warning: " << w << "\n";
}

// ---------------------------------------------------------------- commands

void cmd_simulate(const RunConfig& rc, Output& out, std::ostream& log) {
  if (rc.experiment) {
    ExperimentConfig c = *rc.experiment == 1   ? experiment1_defaults()
                         : *rc.experiment == 2 ? experiment2_defaults()
                                               : experiment3_defaults();
    c.dgp.family = rc.family;
    apply_dgp(rc.dgp, c.dgp);
    c.dgp.seed = rc.seed;
    c.n_reps = rc.n_reps;
    c.threads = rc.threads;
    c.sd = rc.sd;
    const auto report = *rc.experiment == 1   ? run_experiment1(c)
                        : *rc.experiment == 2 ? run_experiment2(c)
                                              : run_experiment3(c);
    log_warnings(log, report.failures);
    out.write("experiment_rows.csv",
              [&](std::ostream& o) { write_experiment_rows(o, report, out.stamp()); });
    out.text("experiment_table.txt", report.table(), true);
    out.text("experiment_summary.json", experiment_summary_json(report, out.stamp()), false);
    log << report.table();
    return;
  }
  DgpSpec spec = rc.preset == "emid-like" ? emid_like_preset() : DgpSpec{};
  if (rc.preset.empty()) spec.family = rc.family;
  apply_dgp(rc.dgp, spec);
  spec.seed = rc.seed;
  const auto sim = simulate(spec);
  out.write("edges.csv", [&](std::ostream& o) { write_edge_list(o, sim.net, out.stamp()); });
  out.write("truth_fitness.csv",
            [&](std::ostream& o) { write_fitness_path(o, sim.truth, sim.net, out.stamp()); });
  out.write("margins.csv",
            [&](std::ostream& o) { write_margins(o, margins_of(sim.net), sim.net, out.stamp()); });
  if (!sim.cov.binary.is_none())
    out.write("covariate_binary.csv",
              [&](std::ostream& o) { write_covariate(o, sim.cov.binary, sim.net, out.stamp()); });
  if (!sim.cov.weight.is_none())
    out.write("covariate_weight.csv",
              [&](std::ostream& o) { write_covariate(o, sim.cov.weight, sim.net, out.stamp()); });
  json truth = {{"kind", to_string(spec.kind)},
                {"n_nodes", spec.n_nodes},
                {"n_times", spec.n_times},
                {"family", to_string(spec.family)},
                {"sigma", spec.sigma},
                {"beta_bin", spec.beta_bin},
                {"beta_w", spec.beta_w}};
  if (spec.kind == DgpKind::sd_self)
    truth["statics"] = {{"w", sim.statics.w}, {"b", sim.statics.b}, {"a", sim.statics.a}};
  out.text("truth.json", stamped_json(out.stamp(), truth), false);
}

void write_za_links(std::ostream& o, const ZaRegFit& fit, const TemporalNetwork& net,
                    const FileStamp& stamp) {
  o << stamp.line() << "\nsrc,dst,n_obs,n_pos,fallback,capped";
  for (int k = 0; k <= kNumRegressors; ++k) o << ",logit_" << k;
  for (int k = 0; k <= kNumRegressors; ++k) o << ",ols_" << k;
  o << ",resid_var\n";
  o.precision(17);
  for (int i = 0; i < fit.n_nodes; ++i)
    for (int j = 0; j < fit.n_nodes; ++j) {
      if (i == j) continue;
      const auto& l = fit.link(i, j);
      o << node_label(net, i) << ',' << node_label(net, j) << ',' << l.n_obs << ',' << l.n_pos
        << ',' << l.fallback << ',' << l.capped;
      for (double v : l.logit) o << ',' << v;
      for (double v : l.ols) o << ',' << v;
      o << ',' << l.resid_var << '\n';
    }
}

void cmd_estimate(const RunConfig& rc, Output& out, std::ostream& log) {
  if (rc.edges.empty() && !rc.margins.empty()) {
    if (rc.family != WeightFamily::poisson || rc.model != "sd")
      throw ConfigError("estimation from 'data.margins' needs model sd with the poisson family");
    if (!rc.n_times || !rc.n_nodes)
      throw ConfigError("fields 'data.n_times' and 'data.n_nodes' are required with margins");
    std::ifstream in(rc.margins);
    if (!in) throw DataError("missing file '" + rc.margins + "'");
    const auto m = read_margins(in, rc.n_times, rc.n_nodes);
    TemporalNetwork shell(rc.n_nodes, std::vector<Snapshot>(rc.n_times, Snapshot(rc.n_nodes, {})));
    CovariateSet xb = load_cov(rc.binary_cov, shell);
    if (!rc.weight_cov.empty())
      throw ConfigError("field 'data.weight_covariate' is not supported with margins");
    const auto fit = fit_poisson_margins(m, xb, rc.sd);
    log_warnings(log, fit.warnings);
    out.text("fit.json", fit_result_json(fit, out.stamp()), false);
    out.write("fitness_path.csv",
              [&](std::ostream& o) { write_fitness_path(o, fit.path, shell, out.stamp()); });
    return;
  }
  const auto d = load_data(rc);
  if (rc.model == "sd") {
    const auto fit = fit_sd(d.net, d.cov, rc.sd);
    log_warnings(log, fit.warnings);
    out.text("fit.json", fit_result_json(fit, out.stamp()), false);
    out.write("fitness_path.csv",
              [&](std::ostream& o) { write_fitness_path(o, fit.path, d.net, out.stamp()); });
  } else if (rc.model == "constant" || rc.model == "nofitness") {
    const auto fit = rc.model == "constant" ? fit_constant(d.net, d.cov, rc.stat)
                                            : fit_nofitness(d.net, d.cov, rc.stat);
    log_warnings(log, fit.warnings);
    out.text("fit.json", fit_result_json(fit, out.stamp()), false);
  } else if (rc.model == "ss-ar1") {
    StaticFitConfig sc = rc.stat;
    sc.estimate_beta = false;
    const auto seq = fit_snapshot_sequence(d.net, {}, sc, rc.threads);
    out.write("fitness_path.csv",
              [&](std::ostream& o) { write_fitness_path(o, seq.path, d.net, out.stamp()); });
    out.write("snapshot_flags.csv", [&](std::ostream& o) {
      o << out.stamp().line() << "\nt,carried,saturated,sigma\n";
      o.precision(17);
      for (std::size_t t = 0; t < seq.carried.size(); ++t)
        o << t << ',' << seq.carried[t] << ',' << seq.saturated[t] << ',' << seq.sigma[t] << '\n';
    });
  } else if (rc.model == "zareg") {
    const auto panel = build_regressors(d.net);
    const auto fit = fit_za_regression(d.net, panel, 1, d.net.n_times());
    out.write("za_links.csv",
              [&](std::ostream& o) { write_za_links(o, fit, d.net, out.stamp()); });
  } else {
    throw ConfigError("field 'model.kind': unknown model '" + rc.model + "'");
  }
}

void cmd_filter(const RunConfig& rc, Output& out, std::ostream&) {
  if (rc.fit_path.empty()) throw ConfigError("field 'filter.fit' is required");
  std::ifstream in(rc.fit_path);
  if (!in) throw DataError("missing file '" + rc.fit_path + "'");
  const auto fit = read_fit_result(in);
  if (fit.statics.w.empty() || fit.fitness.n_nodes() == 0)
    throw DataError("'" + rc.fit_path + "' does not hold a score-driven fit");
  const auto d = load_data(rc);
  if (fit.statics.n_nodes() != d.net.n_nodes() || fit.fitness.n_nodes() != d.net.n_nodes())
    throw DataError("fit has " + std::to_string(fit.statics.n_nodes()) + " nodes, data has " +
                    std::to_string(d.net.n_nodes()));
  const auto path = filter_path(d.net, d.cov, fit.statics, fit.fitness);
  out.write("fitness_path.csv",
            [&](std::ostream& o) { write_fitness_path(o, path, d.net, out.stamp()); });
  out.write("loglik.csv", [&](std::ostream& o) {
    o << out.stamp().line() << "\nt,loglik,loglik_bin,loglik_w\n";
    o.precision(17);
    for (std::size_t t = 0; t < path.per_step_loglik.size(); ++t)
      o << t << ',' << path.per_step_loglik[t] << ',' << path.per_step_bin[t] << ','
        << path.per_step_w[t] << '\n';
  });
}

void cmd_forecast(const RunConfig& rc, Output& out, std::ostream& log) {
  const auto d = load_data(rc);
  const auto res = rolling_forecast(d.net, d.cov, rc.rolling);
  log_warnings(log, res.warnings);
  for (const auto& [m, recs] : res.forecasts) {
    out.write("forecasts_" + to_string(m) + ".csv",
              [&](std::ostream& o) { write_forecasts(o, recs, d.net, out.stamp()); });
    try {
      log << to_string(m) << ": log-MSE " << mse_log(recs) << ", AUC " << forecast_auc(recs)
          << "\n";
    } catch (const std::invalid_argument&) {
    }
  }
}

void cmd_evaluate(const RunConfig& rc, const Options& opts, Output& out, std::ostream& log) {
  const auto d = load_data(rc);
  std::map<std::string, std::string> files = rc.forecast_files;
  if (files.empty()) {
    std::vector<std::string> names(std::begin(kModels), std::end(kModels));
    if (!opts.models.empty()) names = opts.models;
    for (const auto& m : names) {
      const auto p = out.path("forecasts_" + m + ".csv");
      if (fs::exists(p)) files[m] = p.string();
    }
  }
  if (files.empty()) throw DataError("no forecast files to evaluate");
  std::map<std::string, std::vector<ForecastRecord>> fc;
  for (const auto& [m, p] : files) {
    std::ifstream in(p);
    if (!in) throw DataError("missing file '" + p + "'");
    auto recs = read_forecasts(in, d.net);
    for (auto& rec : recs) {
      if (rec.t >= d.net.n_times())
        throw DataError("forecast file '" + p + "' reaches beyond the network");
      const auto& snap = d.net.at(rec.t);
      for (const auto& e : rec.entries)
        if (snap.weight(e.src, e.dst) != e.observed)
          throw DataError("forecast file '" + p + "' disagrees with the observed network at t=" +
                          std::to_string(rec.t));
    }
    fc[m] = std::move(recs);
  }

  std::vector<MetricRow> rows;
  auto guarded = [&](const std::string& m, const std::string& metric, const std::string& split,
                     auto&& fn) {
    try {
      rows.push_back({m, metric, split, fn()});
    } catch (const std::invalid_argument& e) {
      log << "warning: " << m << " " << metric << ": " << e.what() << "\n";
    }
  };
  std::vector<std::string> bin_rows;
  for (const auto& [m, recs] : fc) {
    rows.push_back({m, "n_forecasts", "test", static_cast<double>(recs.size())});
    guarded(m, "mse_log", "test", [&] { return mse_log(recs); });
    guarded(m, "mad_log", "test", [&] { return mad_log(recs); });
    guarded(m, "auc", "test", [&] { return forecast_auc(recs, false); });
    if (rc.per_time_auc) guarded(m, "auc_per_time", "test", [&] { return forecast_auc(recs, true); });
    try {
      const auto bins = support_bins(recs, d.net, rc.rolling.window, rc.support_bins);
      std::vector<double> idx, mse;
      for (std::size_t b = 0; b < bins.size(); ++b) {
        std::ostringstream line;
        line.precision(17);
        line << m << ',' << b << ',' << bins[b].support_lo << ',' << bins[b].support_hi << ','
             << bins[b].mse_log << ',' << bins[b].count;
        bin_rows.push_back(line.str());
        idx.push_back(static_cast<double>(b));
        mse.push_back(bins[b].mse_log);
      }
      if (bins.size() >= 3) {
        const double rho = spearman(idx, mse);
        rows.push_back({m, "support_spearman", "bins", rho});
        rows.push_back({m, "support_spearman_p_value", "bins", spearman_p_value(rho, bins.size())});
      }
    } catch (const std::invalid_argument& e) {
      log << "warning: " << m << " support bins: " << e.what() << "\n";
    }
  }
  if (fc.count(rc.reference)) {
    for (const auto& [m, recs] : fc) {
      if (m == rc.reference) continue;
      try {
        const auto [l1, l2] = paired_losses(recs, fc[rc.reference]);
        if (l1.size() < 10) throw std::invalid_argument("fewer than 10 paired forecasts");
        const auto dm = diebold_mariano(l1, l2, rc.horizon);
        rows.push_back({m, "dm_stat", "vs_" + rc.reference, dm.stat});
        rows.push_back({m, "dm_p_value", "vs_" + rc.reference, dm.p_value});
      } catch (const std::invalid_argument& e) {
        log << "warning: DM " << m << " vs " << rc.reference << ": " << e.what() << "\n";
      }
    }
  }
  out.write("metrics.csv", [&](std::ostream& o) { write_metrics(o, rows, out.stamp()); });
  out.write("support_bins.csv", [&](std::ostream& o) {
    o << out.stamp().line() << "\nmodel,bin,support_lo,support_hi,mse_log,count\n";
    for (const auto& l : bin_rows) o << l << '\n';
  });
  for (const auto& r : rows)
    log << r.model << " " << r.metric << " " << r.split << " " << r.value << "\n";
}

}  // namespace

void run_command(const Options& opts, std::ostream& log) {
  const auto rc = load_config(opts);
  Output out(opts.out_dir, rc, log);
  if (opts.command == "simulate")
    cmd_simulate(rc, out, log);
  else if (opts.command == "estimate")
    cmd_estimate(rc, out, log);
  else if (opts.command == "filter")
    cmd_filter(rc, out, log);
  else if (opts.command == "forecast")
    cmd_forecast(rc, out, log);
  else if (opts.command == "evaluate")
    cmd_evaluate(rc, opts, out, log);
  else
    throw ConfigError("unknown command '" + opts.command + "'");
}

int main(int argc, char** argv) {
  CLI::App app{"Score-driven weighted network models"};
  app.require_subcommand(1, 1);
  Options opts;
  for (const auto& [name, description] : kCommands) {
    auto* sub = app.add_subcommand(name, description);
    sub->add_option("--config", opts.config_path, "JSON run configuration");
    sub->add_option("--out", opts.out_dir, "Output directory");
    sub->add_option("--seed", opts.seed, "Random seed");
    sub->add_option("--threads", opts.threads, "Worker threads");
    sub->add_option("--window", opts.window, "Rolling window length");
    sub->add_option("--model", opts.models, "Model(s)")
        ->check(CLI::IsMember({"sd", "ss-ar1", "constant", "nofitness", "zareg"}));
    sub->add_option("--family", opts.family, "Weight family")
        ->check(CLI::IsMember({"gamma", "poisson", "lognormal"}));
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }
  opts.command = app.get_subcommands().front()->get_name();
  try {
    run_command(opts, std::cerr);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::out_of_range& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}

}  // namespace sdnet::cli
