#include <cmath>
#include <limits>
#include <stdexcept>

#include "pooled.hpp"
#include "sdnet/estimate.hpp"
#include "sdnet/parallel.hpp"

namespace sdnet {

double FitResult::estimate(const std::string& name) const {
  auto it = estimates.find(name);
  return it == estimates.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
}

double FitResult::std_error(const std::string& name) const {
  auto it = std_errors.find(name);
  return it == std_errors.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
}

namespace {

double inverse_diag(const Eigen::MatrixXd& info, int k) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(info.rows());
  e(k) = 1.0;
  const Eigen::VectorXd col = info.ldlt().solve(e);
  return col(k) > 0.0 ? std::sqrt(col(k)) : std::numeric_limits<double>::quiet_NaN();
}

void check_times(const TemporalNetwork& net, const ModelCovariates& cov) {
  for (const auto* c : {&cov.binary, &cov.weight})
    if (!c->is_none() && c->n_times() != net.n_times())
      throw std::invalid_argument("covariate '" + c->name() + "' is not aligned with the network");
}

void inactive_warnings(const TemporalNetwork& net, std::vector<std::string>& warnings) {
  std::vector<char> active(net.n_nodes(), 0);
  for (const auto& s : net.snapshots())
    for (const auto& e : s.edges()) active[e.src] = active[e.dst] = 1;
  for (int i = 0; i < net.n_nodes(); ++i)
    if (!active[i]) warnings.push_back("node " + std::to_string(i) + " never active");
}

FitResult static_result(const TemporalNetwork& net, const ModelCovariates& cov,
                        const StaticFitConfig& cfg, bool fitness) {
  if (net.n_times() < 2) throw std::invalid_argument("static fit needs at least 2 snapshots");
  check_times(net, cov);
  const int n = net.n_nodes();
  const auto pf = detail::pooled_fit(net, 0, net.n_times(), cov, cfg, fitness);
  FitResult r;
  r.model = fitness ? "constant" : "nofitness";
  r.fitness = pf.fitness;
  r.statics.w.clear();
  r.statics.b.clear();
  r.statics.a.clear();
  r.statics.beta_bin = pf.beta_bin;
  r.statics.beta_w = pf.beta_w;
  r.statics.sigma = pf.sigma;
  r.statics.family = cfg.family;
  r.statics.parts = cfg.parts;
  r.converged = pf.converged;
  r.iterations = pf.iterations;
  const int base = fitness ? 2 * n - 1 : (cfg.intercept ? 1 : 0);
  long links = 0;
  for (const auto& s : net.snapshots()) links += static_cast<long>(s.n_links());

  if (pf.has_bin) {
    const bool beta = cfg.estimate_beta && !cov.binary.is_none();
    r.loglik_bin = pf.bin.loglik;
    r.n_params_bin = base + (beta ? 1 : 0);
    r.n_obs_bin = static_cast<long>(net.n_times()) * n * (n - 1);
    if (!fitness && cfg.intercept) r.estimates["intercept_bin"] = pf.intercept_bin;
    r.estimates["beta_bin"] = pf.beta_bin[0];
    if (beta) r.std_errors["beta_bin"] = inverse_diag(pf.bin.info, static_cast<int>(pf.bin.theta.size()) - 1);
    if (pf.saturated)
      r.warnings.push_back(fitness ? "binary fitness saturated at the cap"
                                   : "binary intercept saturated at the cap");
  }
  if (pf.has_w) {
    const bool beta = cfg.estimate_beta && !cov.weight.is_none();
    const bool sigma = cfg.family != WeightFamily::poisson && !cfg.fixed_sigma;
    r.loglik_w = pf.w.loglik;
    r.n_params_w = base + (beta ? 1 : 0) + (sigma ? 1 : 0);
    r.n_obs_w = links;
    if (!fitness && cfg.intercept) r.estimates["intercept_w"] = pf.intercept_w;
    r.estimates["beta_w"] = pf.beta_w[0];
    if (cfg.family != WeightFamily::poisson) r.estimates["sigma"] = pf.sigma;
    // conditional on sigma
    if (beta && !pf.w.theta.empty())
      r.std_errors["beta_w"] = inverse_diag(pf.w.info, static_cast<int>(pf.w.theta.size()) - 1);
    if (links == 0) r.warnings.push_back("no positive weights");
  }
  r.loglik = r.loglik_bin + r.loglik_w;
  r.n_params = r.n_params_bin + r.n_params_w;
  if (fitness) inactive_warnings(net, r.warnings);
  return r;
}

}  // namespace

FitResult fit_constant(const TemporalNetwork& net, const ModelCovariates& cov,
                       const StaticFitConfig& config) {
  return static_result(net, cov, config, true);
}

FitResult fit_nofitness(const TemporalNetwork& net, const ModelCovariates& cov,
                        const StaticFitConfig& config) {
  return static_result(net, cov, config, false);
}

SnapshotFit fit_snapshot(const Snapshot& snap, const ModelCovariates& cov, std::size_t t,
                         const StaticFitConfig& config) {
  if (config.estimate_beta) {
    const bool bin = config.parts != ModelParts::weight;
    const bool w = config.parts != ModelParts::binary;
    for (const auto* c : {bin ? &cov.binary : nullptr, w ? &cov.weight : nullptr}) {
      if (!c || c->is_none()) continue;
      if (c->kind() == CovariateKind::scalar)
        throw std::invalid_argument("unidentified: c1+c2+c3 degeneracy");
      throw std::invalid_argument("fit_snapshot holds beta fixed; set estimate_beta = false");
    }
  }
  const int n = snap.n_nodes();
  const TemporalNetwork one(n, {snap});
  ModelCovariates local;
  for (int k = 0; k < 2; ++k) {
    const auto& c = k == 0 ? cov.binary : cov.weight;
    auto& dst = k == 0 ? local.binary : local.weight;
    dst = c.is_none() ? CovariateSet::none(1) : c.slice(t, t + 1);
  }
  auto cfg = config;
  cfg.estimate_beta = false;
  const auto pf = detail::pooled_fit(one, 0, 1, local, cfg, true);
  SnapshotFit out;
  out.fitness = pf.fitness;
  out.sigma = pf.sigma;
  out.saturated = pf.saturated;
  out.converged = pf.converged;
  out.iterations = pf.iterations;
  return out;
}

SnapshotSequence fit_snapshot_sequence(const TemporalNetwork& net, const ModelCovariates& cov,
                                       const StaticFitConfig& config, int threads) {
  check_times(net, cov);
  const std::size_t T = net.n_times();
  const int n = net.n_nodes();
  const auto full = static_cast<std::size_t>(n) * (n - 1);
  SnapshotSequence seq;
  seq.carried.assign(T, false);
  seq.saturated.assign(T, false);
  seq.sigma.assign(T, config.fixed_sigma.value_or(1.0));
  std::vector<FitnessState> states(T);
  auto cfg = config;
  cfg.estimate_beta = false;
  parallel_for(T, threads, [&](std::size_t t) {
    const auto& s = net.at(t);
    if (s.n_links() == 0 || s.n_links() == full) {
      seq.carried[t] = true;
      return;
    }
    auto fit = fit_snapshot(s, cov, t, cfg);
    states[t] = std::move(fit.fitness);
    seq.saturated[t] = fit.saturated;
    seq.sigma[t] = fit.sigma;
  });
  std::size_t first = T;
  for (std::size_t t = 0; t < T; ++t)
    if (!seq.carried[t]) {
      first = t;
      break;
    }
  for (std::size_t t = 0; t < T; ++t) {
    if (!seq.carried[t]) continue;
    if (first == T)
      states[t] = FitnessState(n);
    else
      states[t] = t < first ? states[first] : states[t - 1];
    if (first != T) seq.sigma[t] = t < first ? seq.sigma[first] : seq.sigma[t - 1];
  }

  StaticParams statics;
  statics.beta_bin = config.beta_bin;
  statics.beta_w = config.beta_w;
  statics.family = config.family;
  statics.parts = config.parts;
  seq.path.states.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    statics.sigma = seq.sigma[t];
    const auto terms = snapshot_terms(net.at(t), states[t], cov, t, statics);
    seq.path.per_step_bin.push_back(terms.loglik_bin);
    seq.path.per_step_w.push_back(terms.loglik_w);
    seq.path.per_step_loglik.push_back(terms.loglik());
  }
  seq.path.states = std::move(states);
  if (T > 0) seq.path.next = seq.path.states.back();
  return seq;
}

Ar1Fit fit_ar1(const std::vector<double>& series) {
  if (series.size() < 3) throw std::invalid_argument("AR(1) needs at least 3 observations");
  const std::size_t n = series.size() - 1;
  double mx = 0.0, my = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    mx += series[t];
    my += series[t + 1];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    sxx += (series[t] - mx) * (series[t] - mx);
    sxy += (series[t] - mx) * (series[t + 1] - my);
  }
  if (!(sxx > 1e-24 * std::max(1.0, mx * mx) * n)) throw std::invalid_argument("degenerate AR(1)");
  Ar1Fit fit;
  fit.n = n;
  fit.b1 = sxy / sxx;
  fit.b0 = my - fit.b1 * mx;
  double ssr = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double r = series[t + 1] - fit.b0 - fit.b1 * series[t];
    ssr += r * r;
  }
  fit.resid_var = ssr / static_cast<double>(n > 2 ? n - 2 : n);
  fit.se_b1 = std::sqrt(fit.resid_var / sxx);
  return fit;
}

double forecast_ar1(const Ar1Fit& fit, double last) { return fit.b0 + fit.b1 * last; }

}  // namespace sdnet
