#include "sdnet/simulate.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "sdnet/parallel.hpp"

namespace sdnet {

std::string to_string(DgpKind k) {
  switch (k) {
    case DgpKind::sd_self: return "sd-self";
    case DgpKind::ar1_fitness: return "ar1-fitness";
    case DgpKind::sin_fitness: return "sin-fitness";
    case DgpKind::static_fitness: return "static-fitness";
    case DgpKind::persistence_cov: return "persistence-cov";
    case DgpKind::omitted_variable: return "omitted-variable";
  }
  return "unknown";
}

DgpKind parse_dgp_kind(const std::string& s) {
  for (auto k : {DgpKind::sd_self, DgpKind::ar1_fitness, DgpKind::sin_fitness,
                 DgpKind::static_fitness, DgpKind::persistence_cov, DgpKind::omitted_variable})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown dgp kind '" + s + "'");
}

void DgpSpec::validate() const {
  if (n_nodes < 2) throw std::invalid_argument("dgp: n_nodes must be >= 2");
  if (n_times < 2) throw std::invalid_argument("dgp: n_times must be >= 2");
  if (noise_sd < 0.0 || covariate.noise_sd < 0.0)
    throw std::invalid_argument("dgp: noise_sd must be >= 0");
  if (level_spread < 0.0) throw std::invalid_argument("dgp: level_spread must be >= 0");
  if (!(sigma > 0.0)) throw std::invalid_argument("dgp: sigma must be > 0");
  if (!(sin_period > 0.0)) throw std::invalid_argument("dgp: sin_period must be > 0");
  for (int g = 0; g < 4; ++g) {
    if (!(sd_b[g] > 0.0 && sd_b[g] < 1.0)) throw std::invalid_argument("dgp: sd_b must lie in (0,1)");
    if (sd_a[g] < 0.0) throw std::invalid_argument("dgp: sd_a must be >= 0");
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

namespace {

std::vector<double> node_levels(const DgpSpec& spec, std::mt19937_64& rng) {
  const int n = spec.n_nodes;
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> levels(4 * static_cast<std::size_t>(n));
  for (int g = 0; g < 4; ++g)
    for (int i = 0; i < n; ++i) levels[g * n + i] = spec.targets[g] + spec.level_spread * z(rng);
  return levels;
}

StaticParams observation_statics(const DgpSpec& spec) {
  StaticParams st;
  const auto n4 = 4 * static_cast<std::size_t>(spec.n_nodes);
  st.w.assign(n4, 0.0);
  st.b.assign(n4, 0.5);
  st.a.assign(n4, 0.0);
  st.beta_bin = {spec.beta_bin};
  st.beta_w = {spec.beta_w};
  st.sigma = spec.sigma;
  st.family = spec.family;
  return st;
}

bool wants_covariates(const DgpSpec& spec) {
  return spec.covariates || spec.beta_bin != 0.0 || spec.beta_w != 0.0;
}

}  // namespace

FitnessPath gen_fitness_paths(const DgpSpec& spec) {
  spec.validate();
  const int n = spec.n_nodes;
  const std::size_t T = spec.n_times;
  std::mt19937_64 rng(derive_seed(spec.seed, 1));
  const auto levels = node_levels(spec, rng);
  std::normal_distribution<double> eps(0.0, 1.0);
  FitnessPath path;
  path.states.assign(T, FitnessState(n));
  std::vector<double> cur = levels;
  if (spec.kind == DgpKind::ar1_fitness || spec.kind == DgpKind::persistence_cov) {
    // start from the stationary distribution
    const double b1 = spec.ar1_b1;
    const double sd0 = std::abs(b1) < 1.0 ? spec.noise_sd / std::sqrt(1.0 - b1 * b1) : 0.0;
    for (std::size_t k = 0; k < cur.size(); ++k) cur[k] = levels[k] + sd0 * eps(rng);
  }
  for (std::size_t t = 0; t < T; ++t) {
    for (int g = 0; g < 4; ++g) {
      auto& dst = path.states[t].group(g);
      for (int i = 0; i < n; ++i) {
        const std::size_t k = static_cast<std::size_t>(g) * n + i;
        switch (spec.kind) {
          case DgpKind::sin_fitness:
            dst[i] = spec.sin_amplitude * std::sin(2.0 * std::numbers::pi * t / spec.sin_period) +
                     levels[k];
            break;
          case DgpKind::ar1_fitness:
          case DgpKind::persistence_cov:
            dst[i] = cur[k];
            cur[k] = levels[k] * (1.0 - spec.ar1_b1) + spec.ar1_b1 * cur[k] +
                     spec.noise_sd * eps(rng);
            break;
          default:
            dst[i] = levels[k];
        }
      }
    }
  }
  return path;
}

CovariateSet gen_ar1_covariate(const std::string& name, std::size_t n_times,
                               const CovariateDgp& dgp, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> eps(0.0, 1.0);
  const double sd0 = std::abs(dgp.b1) < 1.0 ? dgp.noise_sd / std::sqrt(1.0 - dgp.b1 * dgp.b1) : 0.0;
  std::vector<double> x(n_times);
  double cur = dgp.mean + sd0 * eps(rng);
  for (auto& v : x) {
    v = cur;
    cur = dgp.mean * (1.0 - dgp.b1) + dgp.b1 * cur + dgp.noise_sd * eps(rng);
  }
  return CovariateSet::scalar(name, std::move(x));
}

TemporalNetwork gen_network(const DgpSpec& spec, const FitnessPath& path,
                            const ModelCovariates& cov) {
  std::mt19937_64 rng(derive_seed(spec.seed, 3));
  const auto statics = observation_statics(spec);
  std::vector<Snapshot> snaps;
  snaps.reserve(path.states.size());
  for (std::size_t t = 0; t < path.states.size(); ++t)
    snaps.push_back(sample_snapshot(path.states[t], cov, t, statics, rng));
  return TemporalNetwork(spec.n_nodes, std::move(snaps));
}

Simulation simulate(const DgpSpec& spec) {
  spec.validate();
  const int n = spec.n_nodes;
  const std::size_t T = spec.n_times;
  Simulation sim;
  sim.statics = observation_statics(spec);

  switch (spec.kind) {
    case DgpKind::sd_self: {
      std::mt19937_64 level_rng(derive_seed(spec.seed, 1));
      const auto levels = node_levels(spec, level_rng);
      StaticParams st = sim.statics;
      for (int g = 0; g < 4; ++g)
        for (int i = 0; i < n; ++i) {
          const std::size_t k = static_cast<std::size_t>(g) * n + i;
          st.b[k] = spec.sd_b[g];
          st.a[k] = spec.sd_a[g];
          st.w[k] = (1.0 - spec.sd_b[g]) * spec.targets[g];
        }
      st.tie_mode = TieMode::per_group;
      if (wants_covariates(spec)) {
        sim.cov.binary = gen_ar1_covariate("x_bin", T, spec.covariate, derive_seed(spec.seed, 2));
        sim.cov.weight = gen_ar1_covariate("x_w", T, spec.covariate, derive_seed(spec.seed, 4));
      }
      std::mt19937_64 rng(derive_seed(spec.seed, 3));
      FitnessState f = FitnessState::from_flat(levels);
      f = identify(std::move(f));
      std::vector<Snapshot> snaps;
      for (std::size_t t = 0; t < T; ++t) {
        snaps.push_back(sample_snapshot(f, sim.cov, t, st, rng));
        FitnessState next = sd_step(f, snaps.back(), sim.cov, t, st);
        sim.truth.states.push_back(std::move(f));
        f = std::move(next);
      }
      sim.truth.next = std::move(f);
      sim.net = TemporalNetwork(n, std::move(snaps));
      sim.statics = st;
      return sim;
    }
    case DgpKind::persistence_cov: {
      sim.truth = gen_fitness_paths(spec);
      std::mt19937_64 rng(derive_seed(spec.seed, 3));
      std::uniform_real_distribution<double> u01(0.0, 1.0);
      std::vector<Snapshot> snaps;
      std::vector<double> prev(static_cast<std::size_t>(n) * n, 0.0);
      for (std::size_t t = 0; t < T; ++t) {
        const auto& f = sim.truth.states[t];
        std::vector<Edge> edges;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double lag = prev[static_cast<std::size_t>(i) * n + j];
            LinkPredictor pred;
            pred.logit_p = f.bin_out[i] + f.bin_in[j] + spec.beta_bin * (lag > 0.0 ? 1.0 : 0.0);
            pred.log_mean = f.w_out[i] + f.w_in[j] + spec.beta_w * (lag > 0.0 ? std::log(lag) : 0.0);
            if (u01(rng) < link_probability(pred))
              edges.push_back({i, j, sample_weight(rng, pred.log_mean, spec.sigma, spec.family)});
          }
        std::fill(prev.begin(), prev.end(), 0.0);
        for (const auto& e : edges) prev[static_cast<std::size_t>(e.src) * n + e.dst] = e.weight;
        snaps.emplace_back(n, std::move(edges));
      }
      sim.net = TemporalNetwork(n, std::move(snaps));
      sim.cov.binary = lag_indicator_covariate(sim.net);
      sim.cov.weight = lag_logweight_covariate(sim.net);
      return sim;
    }
    case DgpKind::omitted_variable: {
      const auto x1 = gen_ar1_covariate("x1", T, spec.covariate, derive_seed(spec.seed, 2));
      const auto x2 = gen_ar1_covariate("x2", T, spec.covariate, derive_seed(spec.seed, 4));
      sim.truth.states.assign(T, FitnessState(n));
      for (std::size_t t = 0; t < T; ++t) {
        auto& f = sim.truth.states[t];
        const double x = x2.scalar_values()[t];
        std::fill(f.bin_in.begin(), f.bin_in.end(), 0.5 * spec.beta2_bin * x);
        std::fill(f.bin_out.begin(), f.bin_out.end(), 0.5 * spec.beta2_bin * x);
        std::fill(f.w_in.begin(), f.w_in.end(), 0.5 * spec.beta2_w * x);
        std::fill(f.w_out.begin(), f.w_out.end(), 0.5 * spec.beta2_w * x);
      }
      sim.cov = {x1, x1};
      sim.net = gen_network(spec, sim.truth, sim.cov);
      return sim;
    }
    default:
      break;
  }
  sim.truth = gen_fitness_paths(spec);
  if (wants_covariates(spec)) {
    sim.cov.binary = gen_ar1_covariate("x_bin", T, spec.covariate, derive_seed(spec.seed, 2));
    sim.cov.weight = gen_ar1_covariate("x_w", T, spec.covariate, derive_seed(spec.seed, 4));
  }
  sim.net = gen_network(spec, sim.truth, sim.cov);
  return sim;
}

double path_mse(const FitnessPath& truth, const FitnessPath& est, int g_begin, int g_end) {
  if (truth.states.size() != est.states.size())
    throw std::invalid_argument("path_mse: paths differ in length");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < truth.states.size(); ++t) {
    const auto a = identify(truth.states[t]);
    const auto b = identify(est.states[t]);
    for (int g = g_begin; g < g_end; ++g)
      for (std::size_t i = 0; i < a.group(g).size(); ++i) {
        const double d = a.group(g)[i] - b.group(g)[i];
        sum += d * d;
        ++count;
      }
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

std::vector<double> ExperimentReport::values(const std::string& dgp, const std::string& filter,
                                             const std::string& metric) const {
  std::vector<double> out;
  for (const auto& r : rows)
    if (r.dgp == dgp && r.filter == filter && r.metric == metric) out.push_back(r.value);
  return out;
}

double ExperimentReport::mean(const std::string& dgp, const std::string& filter,
                              const std::string& metric) const {
  const auto v = values(dgp, filter, metric);
  if (v.empty()) return std::nan("");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

std::string ExperimentReport::table() const {
  std::vector<std::string> dgps, metrics;
  std::vector<std::vector<std::string>> filters;
  auto index_of = [](std::vector<std::string>& list, const std::string& s) {
    for (std::size_t k = 0; k < list.size(); ++k)
      if (list[k] == s) return k;
    list.push_back(s);
    return list.size() - 1;
  };
  for (const auto& r : rows) {
    const auto d = index_of(dgps, r.dgp);
    if (filters.size() <= d) filters.resize(d + 1);
    index_of(filters[d], r.filter);
    index_of(metrics, r.metric);
  }
  std::ostringstream os;
  os << name << " (" << n_reps << " replications, mean over replications)\n";
  const int w = 12;
  os << std::left << std::setw(18) << "DGP";
  for (std::size_t d = 0; d < dgps.size(); ++d)
    os << "| " << std::setw(static_cast<int>(w * filters[d].size())) << dgps[d];
  os << "\n" << std::setw(18) << "Filter";
  for (std::size_t d = 0; d < dgps.size(); ++d) {
    os << "| ";
    for (const auto& f : filters[d]) os << std::setw(w) << f;
  }
  os << "\n";
  for (const auto& m : metrics) {
    os << std::setw(18) << m;
    for (std::size_t d = 0; d < dgps.size(); ++d) {
      os << "| ";
      for (const auto& f : filters[d]) {
        std::ostringstream cell;
        cell << std::setprecision(4) << mean(dgps[d], f, m);
        os << std::setw(w) << cell.str();
      }
    }
    os << "\n";
  }
  for (const auto& f : failures) os << "failure: " << f << "\n";
  return os.str();
}

namespace {

struct RepOutput {
  std::vector<ExperimentRow> rows;
  std::vector<std::string> failures;
};

ExperimentReport run_reps(const std::string& name, const ExperimentConfig& config,
                          const std::function<void(int, std::uint64_t, RepOutput&)>& body) {
  if (config.n_reps < 1) throw std::invalid_argument("n_reps must be >= 1");
  ExperimentReport report;
  report.name = name;
  report.n_reps = config.n_reps;
  for (int r = 0; r < config.n_reps; ++r) report.seeds.push_back(derive_seed(config.dgp.seed, r));
  std::vector<RepOutput> outs(config.n_reps);
  parallel_for(static_cast<std::size_t>(config.n_reps), config.threads, [&](std::size_t r) {
    body(static_cast<int>(r), report.seeds[r], outs[r]);
  });
  for (auto& o : outs) {
    report.rows.insert(report.rows.end(), o.rows.begin(), o.rows.end());
    report.failures.insert(report.failures.end(), o.failures.begin(), o.failures.end());
  }
  return report;
}

template <typename Fn>
void guarded(RepOutput& out, const std::string& what, int rep, Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    out.failures.push_back(what + " replication " + std::to_string(rep) + ": " + e.what());
  }
}

SdFitConfig quiet(SdFitConfig cfg, WeightFamily family) {
  cfg.family = family;
  cfg.std_errors = false;
  return cfg;
}

}  // namespace

DgpSpec emid_like_preset() {
  DgpSpec d;
  d.kind = DgpKind::ar1_fitness;
  d.n_nodes = 100;
  d.n_times = 298;
  d.targets = {-1.6, -1.6, 0.5, 0.5};
  d.level_spread = 0.6;
  d.family = WeightFamily::lognormal;
  d.sigma = 2.2;
  return d;
}

ExperimentConfig experiment1_defaults() {
  ExperimentConfig c;
  c.dgp.kind = DgpKind::ar1_fitness;
  c.dgp.n_nodes = 30;
  c.dgp.n_times = 150;
  return c;
}

ExperimentConfig experiment2_defaults() {
  ExperimentConfig c = experiment1_defaults();
  c.dgp.beta_bin = 1.0;
  c.dgp.beta_w = 1.0;
  return c;
}

ExperimentConfig experiment3_defaults() {
  ExperimentConfig c = experiment1_defaults();
  c.dgp.kind = DgpKind::omitted_variable;
  c.dgp.beta_bin = 1.0;
  c.dgp.beta_w = 1.0;
  return c;
}

ExperimentReport run_experiment1(const ExperimentConfig& config) {
  return run_reps("Experiment 1", config, [&](int rep, std::uint64_t seed, RepOutput& out) {
    const std::pair<DgpKind, const char*> dgps[] = {{DgpKind::ar1_fitness, "AR(1)"},
                                                    {DgpKind::sin_fitness, "SIN"}};
    for (int d = 0; d < 2; ++d) {
      guarded(out, dgps[d].second, rep, [&] {
        DgpSpec spec = config.dgp;
        spec.kind = dgps[d].first;
        spec.beta_bin = spec.beta_w = 0.0;
        spec.covariates = false;
        spec.seed = derive_seed(seed, d);
        const auto sim = simulate(spec);
        StaticFitConfig ss;
        ss.family = spec.family;
        const auto seq = fit_snapshot_sequence(sim.net, {}, ss);
        const auto sd = fit_sd(sim.net, {}, quiet(config.sd, spec.family));
        const std::pair<const char*, const FitnessPath*> filters[] = {{"SS", &seq.path},
                                                                      {"SD", &sd.path}};
        for (const auto& [fname, path] : filters) {
          out.rows.push_back({"experiment1", dgps[d].second, fname, "mse_bin", rep,
                              path_mse(sim.truth, *path, 0, 2)});
          out.rows.push_back({"experiment1", dgps[d].second, fname, "mse_w", rep,
                              path_mse(sim.truth, *path, 2, 4)});
        }
      });
    }
  });
}

namespace {

void beta_rows(RepOutput& out, const std::string& exp, const std::string& dgp,
               const std::string& filter, int rep, const FitResult& fit, double beta_bin,
               double beta_w) {
  const double bb = fit.estimate("beta_bin");
  const double bw = fit.estimate("beta_w");
  out.rows.push_back({exp, dgp, filter, "beta_bin", rep, bb});
  out.rows.push_back({exp, dgp, filter, "beta_w", rep, bw});
  out.rows.push_back({exp, dgp, filter, "sq_err_beta_bin", rep, (bb - beta_bin) * (bb - beta_bin)});
  out.rows.push_back({exp, dgp, filter, "sq_err_beta_w", rep, (bw - beta_w) * (bw - beta_w)});
}

}  // namespace

ExperimentReport run_experiment2(const ExperimentConfig& config) {
  return run_reps("Experiment 2", config, [&](int rep, std::uint64_t seed, RepOutput& out) {
    const std::pair<DgpKind, const char*> dgps[] = {{DgpKind::ar1_fitness, "AR(1) scalar"},
                                                    {DgpKind::persistence_cov, "Persistence"}};
    for (int d = 0; d < 2; ++d) {
      guarded(out, dgps[d].second, rep, [&] {
        DgpSpec spec = config.dgp;
        spec.kind = dgps[d].first;
        spec.seed = derive_seed(seed, d);
        const auto sim = simulate(spec);
        StaticFitConfig cc;
        cc.family = spec.family;
        const auto constant = fit_constant(sim.net, sim.cov, cc);
        const auto sd = fit_sd(sim.net, sim.cov, quiet(config.sd, spec.family));
        beta_rows(out, "experiment2", dgps[d].second, "Constant", rep, constant, spec.beta_bin,
                  spec.beta_w);
        beta_rows(out, "experiment2", dgps[d].second, "SD", rep, sd, spec.beta_bin, spec.beta_w);
      });
    }
  });
}

ExperimentReport run_experiment3(const ExperimentConfig& config) {
  return run_reps("Experiment 3", config, [&](int rep, std::uint64_t seed, RepOutput& out) {
    guarded(out, "omitted-variable", rep, [&] {
      DgpSpec spec = config.dgp;
      spec.kind = DgpKind::omitted_variable;
      spec.seed = derive_seed(seed, 0);
      const auto sim = simulate(spec);
      StaticFitConfig cc;
      cc.family = spec.family;
      StaticFitConfig nf = cc;
      nf.intercept = false;
      const auto nofit = fit_nofitness(sim.net, sim.cov, nf);
      const auto constant = fit_constant(sim.net, sim.cov, cc);
      const auto sd = fit_sd(sim.net, sim.cov, quiet(config.sd, spec.family));
      const std::string dgp = "Omitted variable";
      beta_rows(out, "experiment3", dgp, "NoFitness", rep, nofit, spec.beta_bin, spec.beta_w);
      beta_rows(out, "experiment3", dgp, "Constant", rep, constant, spec.beta_bin, spec.beta_w);
      beta_rows(out, "experiment3", dgp, "SD", rep, sd, spec.beta_bin, spec.beta_w);
    });
  });
}

}  // namespace sdnet
