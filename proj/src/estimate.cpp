#include "sdnet/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "pooled.hpp"

namespace sdnet {

namespace {

double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }
double logit(double b) { return std::log(b / (1.0 - b)); }

const char* part_tag(int part) { return part == 0 ? "bin" : "w"; }

// Free parameters of one half (binary or weighted) of the recursion.
// per-group and targeted: [omega, u_in, u_out, v_in, v_out, beta..., s]
// per-node:  [w_in(N), w_out(N), u_in(N), u_out(N), v_in(active), v_out(active), beta..., s]
// with b = logistic(u), a = exp(v), sigma = exp(s) and, per group,
// w_in = w_out = omega / 2 (only their sum is identified), plus the fixed
// (1 - b) dev_i offsets in targeted mode. A trailing free coordinate shifts
// the initial state of the block by c / 2 on in and out when f0 is not fixed.
struct Block {
  int part = 0;
  int n = 0;
  TieMode mode = TieMode::per_group;
  int beta_len = 0;
  bool sigma = false;
  bool shift = false;
  std::vector<int> a_nodes[2];
  std::vector<double> dev[2];

  bool grouped() const { return mode != TieMode::per_node; }
  double offset(int d, int i) const { return dev[d].empty() ? 0.0 : dev[d][i]; }
  int g_in() const { return 2 * part; }
  int n_w() const { return grouped() ? 1 : 2 * n; }
  int n_u() const { return grouped() ? 2 : 2 * n; }
  int n_v() const {
    return grouped() ? 2 : static_cast<int>(a_nodes[0].size() + a_nodes[1].size());
  }
  int beta_at() const { return n_w() + n_u() + n_v(); }
  int sigma_at() const { return beta_at() + beta_len; }
  int shift_at() const { return sigma_at() + (sigma ? 1 : 0); }
  int size() const { return shift_at() + (shift ? 1 : 0); }

  FitnessState start_state(const std::vector<double>& th, FitnessState f0) const {
    if (!shift) return f0;
    for (int d = 0; d < 2; ++d)
      for (double& v : f0.group(g_in() + d)) v += 0.5 * th[shift_at()];
    return f0;
  }
  // targeted levels add 2N - 2 free deviations estimated by the pooled fit
  int n_effective() const {
    if (mode == TieMode::per_node) return size() - 1;
    return size() + (mode == TieMode::targeted ? 2 * n - 2 : 0);
  }

  void apply(const std::vector<double>& th, StaticParams& st) const {
    const int N = n;
    for (int d = 0; d < 2; ++d) {
      const std::size_t off = static_cast<std::size_t>(g_in() + d) * N;
      if (grouped()) {
        const double b = logistic(th[1 + d]);
        const double a = std::exp(th[3 + d]);
        for (int i = 0; i < N; ++i) {
          st.w[off + i] = 0.5 * th[0] + (1.0 - b) * offset(d, i);
          st.b[off + i] = b;
          st.a[off + i] = a;
        }
      } else {
        for (int i = 0; i < N; ++i) {
          st.w[off + i] = th[d * N + i];
          st.b[off + i] = logistic(th[2 * N + d * N + i]);
          st.a[off + i] = 0.0;
        }
        int base = 4 * N + (d == 0 ? 0 : static_cast<int>(a_nodes[0].size()));
        for (std::size_t k = 0; k < a_nodes[d].size(); ++k)
          st.a[off + a_nodes[d][k]] = std::exp(th[base + k]);
      }
    }
    if (beta_len > 0) {
      auto& beta = part == 0 ? st.beta_bin : st.beta_w;
      beta.assign(th.begin() + beta_at(), th.begin() + beta_at() + beta_len);
    }
    if (sigma) st.sigma = std::exp(th[sigma_at()]);
  }

  std::vector<double> extract(const StaticParams& st) const {
    std::vector<double> th(size(), 0.0);
    const int N = n;
    for (int d = 0; d < 2; ++d) {
      const std::size_t off = static_cast<std::size_t>(g_in() + d) * N;
      if (grouped()) {
        double mean = 0.0;
        for (int i = 0; i < N; ++i) mean += st.w[off + i] - (1.0 - st.b[off]) * offset(d, i);
        th[0] += mean / N;
        th[1 + d] = logit(std::clamp(st.b[off], 1e-9, 1.0 - 1e-9));
        th[3 + d] = std::log(std::max(st.a[off], 1e-12));
      } else {
        int base = 4 * N + (d == 0 ? 0 : static_cast<int>(a_nodes[0].size()));
        for (int i = 0; i < N; ++i) {
          th[d * N + i] = st.w[off + i];
          th[2 * N + d * N + i] = logit(std::clamp(st.b[off + i], 1e-9, 1.0 - 1e-9));
        }
        for (std::size_t k = 0; k < a_nodes[d].size(); ++k)
          th[base + k] = std::log(std::max(st.a[off + a_nodes[d][k]], 1e-12));
      }
    }
    const auto& beta = part == 0 ? st.beta_bin : st.beta_w;
    for (int k = 0; k < beta_len; ++k)
      th[beta_at() + k] = beta.size() == 1 ? (beta_len == 1 ? beta[0] : 0.5 * beta[0]) : beta[k];
    if (sigma) th[sigma_at()] = std::log(st.sigma);
    return th;
  }

  // Reported name, natural value and d(natural)/d(free) per free coordinate.
  struct Natural {
    std::string name;
    double value;
    double jac;
  };

  std::vector<Natural> naturals(const std::vector<double>& th) const {
    std::vector<Natural> out;
    const std::string tag = part_tag(part);
    const char* dir[2] = {"_in", "_out"};
    if (grouped()) {
      out.push_back({"w_" + tag, th[0], 1.0});
      for (int d = 0; d < 2; ++d) {
        const double b = logistic(th[1 + d]);
        out.push_back({"b_" + tag + dir[d], b, b * (1.0 - b)});
      }
      for (int d = 0; d < 2; ++d) {
        const double a = std::exp(th[3 + d]);
        out.push_back({"a_" + tag + dir[d], a, a});
      }
    } else {
      for (int d = 0; d < 2; ++d)
        for (int i = 0; i < n; ++i)
          out.push_back({"w_" + tag + dir[d] + "[" + std::to_string(i) + "]", th[d * n + i], 1.0});
      for (int d = 0; d < 2; ++d)
        for (int i = 0; i < n; ++i) {
          const double b = logistic(th[2 * n + d * n + i]);
          out.push_back({"b_" + tag + dir[d] + "[" + std::to_string(i) + "]", b, b * (1.0 - b)});
        }
      int k = 4 * n;
      for (int d = 0; d < 2; ++d)
        for (int node : a_nodes[d]) {
          const double a = std::exp(th[k++]);
          out.push_back({"a_" + tag + dir[d] + "[" + std::to_string(node) + "]", a, a});
        }
    }
    const std::string beta_name = part == 0 ? "beta_bin" : "beta_w";
    for (int k = 0; k < beta_len; ++k) {
      std::string name = beta_name;
      if (beta_len > 1)
        name += (k < n ? "_src[" + std::to_string(k) : "_dst[" + std::to_string(k - n)) + "]";
      out.push_back({name, th[beta_at() + k], 1.0});
    }
    if (sigma) {
      const double s = std::exp(th[sigma_at()]);
      out.push_back({"sigma", s, s});
    }
    if (shift) out.push_back({"f0_shift_" + tag, th[shift_at()], 1.0});
    return out;
  }
};

using PathEvaluator = std::function<FitnessPath(const StaticParams&, const FitnessState&)>;

struct BlockOutcome {
  std::vector<double> theta;
  bool converged = false;
  int iterations = 0;
};

const std::vector<double>& part_steps(const FitnessPath& p, int part) {
  return part == 0 ? p.per_step_bin : p.per_step_w;
}

BlockOutcome fit_block(const Block& block, const StaticParams& base, const FitnessState& f0,
                       const PathEvaluator& eval,
                       const std::vector<std::vector<double>>& starts, const SdFitConfig& config,
                       FitResult& result) {
  const int part = block.part;
  auto statics_of = [&](const std::vector<double>& th) {
    StaticParams st = base;
    st.parts = part == 0 ? ModelParts::binary : ModelParts::weight;
    block.apply(th, st);
    return st;
  };
  const Objective objective = [&](const std::vector<double>& th) {
    const auto path = eval(statics_of(th), block.start_state(th, f0));
    double ll = 0.0;
    for (double v : part_steps(path, part)) ll += v;
    return -ll;
  };

  std::vector<double> best = starts.front();
  double best_value = std::numeric_limits<double>::infinity();
  for (const auto& s : starts) {
    double v;
    try {
      v = objective(s);
    } catch (const std::runtime_error&) {
      continue;
    }
    if (std::isfinite(v) && v < best_value) {
      best_value = v;
      best = s;
    }
  }
  if (!std::isfinite(best_value))
    throw NumericalError(std::string("no finite starting point for the ") +
                         (part == 0 ? "binary" : "weighted") + " recursion");

  const auto opt = minimize_bfgs(objective, best, config.optim);
  BlockOutcome out;
  out.theta = opt.x;
  out.converged = opt.converged;
  out.iterations = opt.iterations;
  if (!opt.converged)
    result.warnings.push_back(std::string(part == 0 ? "binary" : "weighted") +
                              " optimization did not converge: " + opt.message);

  const auto naturals = block.naturals(opt.x);
  for (const auto& nat : naturals) result.estimates[nat.name] = nat.value;

  if (config.std_errors) {
    const VectorObjective steps = [&](const std::vector<double>& th) {
      return part_steps(eval(statics_of(th), block.start_state(th, f0)), part);
    };
    try {
      const Eigen::MatrixXd J = fd_jacobian(steps, opt.x, config.optim.fd_step);
      const Eigen::MatrixXd opg = J.transpose() * J;
      const Eigen::MatrixXd cov =
          opg.completeOrthogonalDecomposition().pseudoInverse();
      for (std::size_t k = 0; k < naturals.size(); ++k) {
        const double var = cov(k, k);
        result.std_errors[naturals[k].name] =
            var > 0.0 ? std::abs(naturals[k].jac) * std::sqrt(var)
                      : std::numeric_limits<double>::quiet_NaN();
      }
    } catch (const std::runtime_error& e) {
      result.warnings.push_back(std::string("standard errors unavailable: ") + e.what());
    }
  }
  return out;
}

std::vector<char> active_nodes(const TemporalNetwork& net, int direction) {
  std::vector<char> active(net.n_nodes(), 0);
  for (const auto& s : net.snapshots())
    for (const auto& e : s.edges()) active[direction == 0 ? e.dst : e.src] = 1;
  return active;
}

// Default starts: a small grid over (b, a) with omega matching the mean
// level of f0 in the block.
std::vector<std::vector<double>> grid_starts(const Block& block, const StaticParams& base,
                                             const FitnessState& f0) {
  const auto& in = f0.group(block.g_in());
  double level = 0.0;
  for (double v : in) level += v;
  level /= static_cast<double>(in.size());
  std::vector<std::vector<double>> starts;
  for (double b : {0.9, 0.98}) {
    for (double a : {0.01, 0.05, 0.2}) {
      StaticParams st = base;
      for (int d = 0; d < 2; ++d) {
        const std::size_t off = static_cast<std::size_t>(block.g_in() + d) * block.n;
        const auto& g = f0.group(block.g_in() + d);
        for (int i = 0; i < block.n; ++i) {
          st.w[off + i] =
              (1.0 - b) * (block.mode == TieMode::per_node ? g[i] : level);
          st.b[off + i] = b;
          st.a[off + i] = a;
        }
      }
      starts.push_back(block.extract(st));
    }
  }
  return starts;
}

void finish_counts(FitResult& r, const std::vector<Block>& blocks) {
  for (const auto& b : blocks) (b.part == 0 ? r.n_params_bin : r.n_params_w) = b.n_effective();
  r.n_params = r.n_params_bin + r.n_params_w;
}

struct SdProblem {
  int n = 0;
  std::size_t T = 0;
  PathEvaluator eval;
  FitnessState f0;
  /// Pooled static levels used by the targeted tie mode.
  FitnessState target;
  StaticParams base;
  bool beta_bin = false;
  bool beta_w = false;
  bool sigma = false;
  std::vector<char> active[4];
};

FitResult run_sd(const SdProblem& prob, const SdFitConfig& config, const std::string& model) {
  FitResult result;
  result.model = model;
  result.fitness = prob.f0;
  std::vector<Block> blocks;
  for (int part = 0; part < 2; ++part) {
    if (part == 0 && config.parts == ModelParts::weight) continue;
    if (part == 1 && config.parts == ModelParts::binary) continue;
    Block b;
    b.part = part;
    b.n = prob.n;
    b.mode = config.tie_mode;
    const bool beta = part == 0 ? prob.beta_bin : prob.beta_w;
    b.beta_len = beta ? (config.node_specific_beta ? 2 * prob.n : 1) : 0;
    b.sigma = part == 1 && prob.sigma;
    b.shift = !config.f0;
    for (int d = 0; d < 2; ++d)
      for (int i = 0; i < prob.n; ++i)
        if (prob.active[2 * part + d][i]) b.a_nodes[d].push_back(i);
    if (b.mode == TieMode::targeted) {
      if (prob.target.n_nodes() != prob.n) throw std::logic_error("targeted mode without levels");
      for (int d = 0; d < 2; ++d) {
        const auto& m = prob.target.group(2 * part + d);
        double mean = 0.0;
        for (double v : m) mean += v;
        mean /= prob.n;
        for (double v : m) b.dev[d].push_back(v - mean);
      }
    }
    blocks.push_back(b);
  }

  StaticParams statics = prob.base;
  FitnessState f0 = prob.f0;
  bool converged = true;
  for (const auto& block : blocks) {
    std::vector<std::vector<double>> starts;
    if (config.start) {
      StaticParams st = prob.base;
      const auto& s = *config.start;
      if (s.n_nodes() != prob.n) throw std::invalid_argument("warm start does not match N");
      st.w = s.w;
      st.b = s.b;
      st.a = s.a;
      st.beta_bin = s.beta_bin;
      st.beta_w = s.beta_w;
      if (block.sigma) st.sigma = s.sigma;
      starts.push_back(block.extract(st));
    } else {
      starts = grid_starts(block, prob.base, prob.f0);
    }
    const auto out = fit_block(block, prob.base, prob.f0, prob.eval, starts, config, result);
    block.apply(out.theta, statics);
    f0 = block.start_state(out.theta, f0);
    converged = converged && out.converged;
    result.iterations += out.iterations;
  }
  statics.parts = config.parts;
  result.statics = statics;
  result.converged = converged;
  result.fitness = identify(f0);
  result.path = prob.eval(statics, f0);
  result.loglik_bin = result.path.total_bin();
  result.loglik_w = result.path.total_w();
  result.loglik = result.loglik_bin + result.loglik_w;
  finish_counts(result, blocks);
  if (config.parts != ModelParts::weight) {
    result.estimates.try_emplace("beta_bin", statics.beta_bin.size() == 1 ? statics.beta_bin[0] : 0.0);
    result.n_obs_bin = static_cast<long>(prob.T) * prob.n * (prob.n - 1);
  }
  if (config.parts != ModelParts::binary) {
    result.estimates.try_emplace("beta_w", statics.beta_w.size() == 1 ? statics.beta_w[0] : 0.0);
    if (statics.family != WeightFamily::poisson) result.estimates.try_emplace("sigma", statics.sigma);
  }
  return result;
}

StaticParams blank_statics(int n, const SdFitConfig& config) {
  StaticParams st;
  st.w.assign(4 * static_cast<std::size_t>(n), 0.0);
  st.b.assign(4 * static_cast<std::size_t>(n), 0.5);
  st.a.assign(4 * static_cast<std::size_t>(n), 0.0);
  st.family = config.family;
  st.tie_mode = config.tie_mode;
  st.scaling_power = config.scaling_power;
  st.curvature = config.curvature;
  return st;
}

std::vector<double> spread_beta(double beta, bool node_specific, int n) {
  if (!node_specific) return {beta};
  return std::vector<double>(2 * static_cast<std::size_t>(n), 0.5 * beta);
}

}  // namespace

FitResult fit_sd(const TemporalNetwork& net, const ModelCovariates& cov,
                 const SdFitConfig& config) {
  const std::size_t T = net.n_times();
  const int n = net.n_nodes();
  if (T < config.min_times)
    throw std::invalid_argument("fit_sd needs at least " + std::to_string(config.min_times) +
                                " snapshots");
  for (const auto* c : {&cov.binary, &cov.weight})
    if (!c->is_none() && c->n_times() != T)
      throw std::invalid_argument("covariate '" + c->name() + "' is not aligned with the network");
  if (config.family == WeightFamily::poisson && config.parts != ModelParts::binary &&
      !net.has_integer_weights())
    throw std::invalid_argument("Poisson family needs integer weights");

  SdProblem prob;
  prob.n = n;
  prob.T = T;
  prob.beta_bin = !cov.binary.is_none();
  prob.beta_w = !cov.weight.is_none();
  prob.sigma = config.family != WeightFamily::poisson && !config.fixed_sigma;
  prob.base = blank_statics(n, config);

  StaticFitConfig init;
  init.family = config.family;
  init.parts = config.parts;
  init.ridge = config.init_ridge;
  init.fixed_sigma = config.fixed_sigma;
  const std::size_t window = std::clamp<std::size_t>(config.init_window, 1, T);
  const auto pooled = detail::pooled_fit(net, 0, window, cov, init, true);
  prob.f0 = config.f0 ? identify(*config.f0) : pooled.fitness;
  if (prob.f0.n_nodes() != n) throw std::invalid_argument("f0 does not match N");
  prob.base.beta_bin = spread_beta(pooled.beta_bin[0], config.node_specific_beta && prob.beta_bin, n);
  prob.base.beta_w = spread_beta(pooled.beta_w[0], config.node_specific_beta && prob.beta_w, n);
  prob.base.sigma = config.fixed_sigma.value_or(pooled.sigma);

  FitResult warnings_holder;
  for (int d = 0; d < 2; ++d) {
    const auto act = active_nodes(net, d);
    prob.active[d] = act;
    prob.active[2 + d] = act;
  }
  for (int i = 0; i < n; ++i)
    if (!prob.active[0][i] && !prob.active[1][i])
      warnings_holder.warnings.push_back("node " + std::to_string(i) + " never active" +
                                         (config.tie_mode == TieMode::per_node
                                              ? "; its a is pinned to 0"
                                              : ""));
  if (config.tie_mode != TieMode::per_node)
    for (auto& a : prob.active) std::fill(a.begin(), a.end(), 1);
  if (config.tie_mode == TieMode::targeted)
    prob.target = detail::pooled_fit(net, 0, T, cov, init, true).fitness;

  prob.eval = [&net, &cov](const StaticParams& st, const FitnessState& f0) {
    return filter_path(net, cov, st, f0);
  };
  auto result = run_sd(prob, config, "sd");
  result.warnings.insert(result.warnings.begin(), warnings_holder.warnings.begin(),
                         warnings_holder.warnings.end());
  long links = 0;
  for (const auto& s : net.snapshots()) links += static_cast<long>(s.n_links());
  if (config.parts != ModelParts::binary) result.n_obs_w = links;
  return result;
}

SnapshotTerms margins_terms(const Margins& m, std::size_t t, const FitnessState& f,
                            const CovariateSet& binary_cov, const StaticParams& statics) {
  const int n = f.n_nodes();
  SnapshotTerms out;
  out.score = FitnessState(n);
  out.curvature = FitnessState(n);
  const auto& din = m.deg_in[t];
  const auto& dout = m.deg_out[t];
  if (statics.parts != ModelParts::weight) {
    const double x = binary_cov.is_none() ? 0.0 : binary_cov.scalar_values()[t];
    double ll = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const double lin = f.bin_out[i] + f.bin_in[j] + link_coefficient(statics.beta_bin, i, j, n) * x;
        ll += log1m_sigmoid(lin);
        const double p = link_probability({lin, 0.0});
        const double c = p * (1.0 - p);
        out.score.bin_out[i] -= p;
        out.score.bin_in[j] -= p;
        out.curvature.bin_out[i] += c;
        out.curvature.bin_in[j] += c;
      }
    }
    for (int i = 0; i < n; ++i) {
      ll += dout[i] * f.bin_out[i] + din[i] * f.bin_in[i];
      out.score.bin_out[i] += dout[i];
      out.score.bin_in[i] += din[i];
      if (statics.beta_bin.size() == 1)
        ll += statics.beta_bin[0] * x * dout[i];
      else
        ll += x * (statics.beta_bin[i] * dout[i] + statics.beta_bin[n + i] * din[i]);
    }
    out.loglik_bin = ll;
  }
  if (statics.parts != ModelParts::binary) {
    double ll = 0.0;
    for (int d = 0; d < 2; ++d) {
      const auto& deg = d == 0 ? din : dout;
      const auto& str = d == 0 ? m.str_in[t] : m.str_out[t];
      const auto& eta = d == 0 ? f.w_in : f.w_out;
      auto& score = d == 0 ? out.score.w_in : out.score.w_out;
      auto& curv = d == 0 ? out.curvature.w_in : out.curvature.w_out;
      for (int k = 0; k < n; ++k) {
        const double mu = std::exp(eta[k]);
        ll += str[k] * eta[k] - deg[k] * mu;
        score[k] = str[k] - deg[k] * mu;
        curv[k] = deg[k] * mu;
      }
    }
    out.loglik_w = ll;
  }
  return out;
}

FitResult fit_poisson_margins(const Margins& margins, const CovariateSet& binary_cov,
                              const SdFitConfig& config) {
  margins.validate();
  const std::size_t T = margins.n_times();
  const int n = margins.n_nodes();
  if (T < config.min_times)
    throw std::invalid_argument("fit_poisson_margins needs at least " +
                                std::to_string(config.min_times) + " snapshots");
  if (binary_cov.kind() == CovariateKind::per_link)
    throw std::invalid_argument("margins-only fit supports scalar covariates only");
  if (!binary_cov.is_none() && binary_cov.n_times() != T)
    throw std::invalid_argument("covariate '" + binary_cov.name() + "' is not aligned with the margins");

  SdFitConfig cfg = config;
  cfg.family = WeightFamily::poisson;
  SdProblem prob;
  prob.n = n;
  prob.T = T;
  prob.beta_bin = !binary_cov.is_none();
  prob.beta_w = false;
  prob.sigma = false;
  prob.base = blank_statics(n, cfg);

  const std::size_t window = std::clamp<std::size_t>(cfg.init_window, 1, T);
  FitnessState f0(n);
  std::vector<double> din(n, 0.0), dout(n, 0.0);
  double links_window = 0.0;
  for (std::size_t t = 0; t < window; ++t)
    for (int i = 0; i < n; ++i) {
      din[i] += margins.deg_in[t][i];
      dout[i] += margins.deg_out[t][i];
      links_window += margins.deg_out[t][i];
    }
  if (cfg.parts != ModelParts::weight) {
    detail::Problem p;
    p.binary = true;
    p.layout = {n, true, false, prob.beta_bin};
    p.ridge = cfg.init_ridge;
    p.obs.assign(p.layout.size(), 0.0);
    for (std::size_t t = 0; t < window; ++t) {
      const double x = binary_cov.is_none() ? 0.0 : binary_cov.scalar_values()[t];
      double links_t = 0.0;
      for (int i = 0; i < n; ++i) links_t += margins.deg_out[t][i];
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (i != j) p.units.push_back({i, j, 0.0, x, 0.0});
      if (p.layout.beta) p.obs[p.layout.beta_index()] += x * links_t;
    }
    for (int i = 0; i < n; ++i) {
      p.obs[i] = din[i];
      p.obs[n + i] = dout[i];
    }
    detail::binary_start(p, din, dout, static_cast<double>(window * (n - 1)));
    const auto sol = detail::solve(p);
    detail::write_fitness(f0, 0, p, sol);
    if (p.layout.beta) prob.base.beta_bin = spread_beta(sol.theta[p.layout.beta_index()],
                                                        cfg.node_specific_beta, n);
  }
  if (cfg.parts != ModelParts::binary) {
    for (int d = 0; d < 2; ++d) {
      auto& eta = d == 0 ? f0.w_in : f0.w_out;
      double sum = 0.0;
      int active = 0;
      std::vector<char> has(n, 0);
      for (int k = 0; k < n; ++k) {
        double s = 0.0, deg = 0.0;
        for (std::size_t t = 0; t < window; ++t) {
          s += d == 0 ? margins.str_in[t][k] : margins.str_out[t][k];
          deg += d == 0 ? margins.deg_in[t][k] : margins.deg_out[t][k];
        }
        if (deg > 0.0) {
          eta[k] = std::log(s / deg);
          sum += eta[k];
          ++active;
          has[k] = 1;
        }
      }
      for (int k = 0; k < n; ++k)
        if (!has[k]) eta[k] = active ? sum / active : 0.0;
    }
  }
  prob.f0 = config.f0 ? identify(*config.f0) : identify(f0);

  FitResult notes;
  double total_links = 0.0;
  for (std::size_t t = 0; t < T; ++t)
    for (int i = 0; i < n; ++i) total_links += margins.deg_out[t][i];
  if (total_links == 0.0) notes.warnings.push_back("all degrees are zero");
  for (int d = 0; d < 2; ++d) {
    std::vector<char> act(n, 0);
    for (std::size_t t = 0; t < T; ++t)
      for (int i = 0; i < n; ++i)
        if ((d == 0 ? margins.deg_in[t][i] : margins.deg_out[t][i]) > 0) act[i] = 1;
    prob.active[d] = act;
    prob.active[2 + d] = act;
  }
  if (cfg.tie_mode != TieMode::per_node)
    for (auto& a : prob.active) std::fill(a.begin(), a.end(), 1);
  prob.target = prob.f0;

  prob.eval = [&margins, &binary_cov](const StaticParams& st, const FitnessState& f0) {
    FitnessPath path;
    FitnessState f = f0;
    for (std::size_t t = 0; t < margins.n_times(); ++t) {
      const auto terms = margins_terms(margins, t, f, binary_cov, st);
      if (!std::isfinite(terms.loglik())) throw NumericalError("non-finite log-likelihood");
      path.per_step_bin.push_back(terms.loglik_bin);
      path.per_step_w.push_back(terms.loglik_w);
      path.per_step_loglik.push_back(terms.loglik());
      FitnessState next = sd_update(f, terms, st);
      path.states.push_back(std::move(f));
      f = std::move(next);
    }
    path.next = std::move(f);
    return path;
  };
  auto result = run_sd(prob, cfg, "poisson-margins");
  result.warnings.insert(result.warnings.begin(), notes.warnings.begin(), notes.warnings.end());
  if (cfg.parts != ModelParts::binary) result.n_obs_w = static_cast<long>(total_links);
  return result;
}

}  // namespace sdnet
