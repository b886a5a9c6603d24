#include "pooled.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/tools/minima.hpp>

namespace sdnet::detail {

namespace {

struct Eval {
  double ll = 0.0;
  double penalized = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd info;
};

double linear_part(const Problem& p, const std::vector<double>& th, const Unit& u) {
  const auto& L = p.layout;
  double lin = u.offset;
  if (L.fitness)
    lin += th[u.j] + th[L.n + u.i];
  else if (L.intercept)
    lin += th[0];
  if (L.beta) lin += th[L.beta_index()] * u.x;
  return lin;
}

Eval evaluate(const Problem& p, const std::vector<double>& th, double sigma, bool derivs,
              bool penalties) {
  const auto& L = p.layout;
  const int m = L.size();
  const int bi = L.beta_index();
  Eval e;
  if (derivs) {
    e.grad = Eigen::VectorXd::Zero(m);
    e.info = Eigen::MatrixXd::Zero(m, m);
  }
  double ll = 0.0;
  for (const auto& u : p.units) {
    const double lin = linear_part(p, th, u);
    double g, c;
    if (p.binary) {
      const double ex = std::exp(-std::abs(lin));
      ll -= std::max(lin, 0.0) + std::log1p(ex);
      const double prob = lin >= 0.0 ? 1.0 / (1.0 + ex) : ex / (1.0 + ex);
      g = -prob;
      c = prob * (1.0 - prob);
    } else {
      ll += weight_log_density(u.y, lin, sigma, p.family);
      if (!derivs) continue;
      g = weight_score_term(u.y, lin, sigma, p.family);
      c = weight_curvature_term(u.y, lin, sigma, p.family);
    }
    if (!derivs) continue;
    int idx[3];
    double val[3];
    int k = 0;
    if (L.fitness) {
      idx[k] = u.j;
      val[k++] = 1.0;
      idx[k] = L.n + u.i;
      val[k++] = 1.0;
    } else if (L.intercept) {
      idx[k] = 0;
      val[k++] = 1.0;
    }
    if (L.beta) {
      idx[k] = bi;
      val[k++] = u.x;
    }
    for (int r = 0; r < k; ++r) {
      e.grad(idx[r]) += g * val[r];
      for (int s = 0; s < k; ++s) e.info(idx[r], idx[s]) += c * val[r] * val[s];
    }
  }
  if (p.binary) {
    ll += p.obs_offset;
    for (int k = 0; k < m; ++k) {
      ll += p.obs[k] * th[k];
      if (derivs) e.grad(k) += p.obs[k];
    }
  }
  e.ll = ll;
  e.penalized = ll;
  if (L.fitness && penalties) {
    const int n = L.n;
    double diff = 0.0;
    for (int i = 0; i < n; ++i) diff += th[i] - th[n + i];
    e.penalized -= 0.5 * diff * diff;
    if (p.ridge > 0.0) {
      for (int g = 0; g < 2; ++g) {
        double mean = 0.0;
        for (int i = 0; i < n; ++i) mean += th[g * n + i];
        mean /= n;
        for (int i = 0; i < n; ++i) {
          const double d = th[g * n + i] - mean;
          e.penalized -= 0.5 * p.ridge * d * d;
          if (derivs) e.grad(g * n + i) -= p.ridge * d;
        }
        if (derivs) {
          auto block = e.info.block(g * n, g * n, n, n);
          block.diagonal().array() += p.ridge;
          block.array() -= p.ridge / n;
        }
      }
    }
    if (derivs) {
      for (int i = 0; i < n; ++i) {
        e.grad(i) -= diff;
        e.grad(n + i) += diff;
      }
      Eigen::VectorXd v(m);
      v.setZero();
      v.head(n).setOnes();
      v.segment(n, n).setConstant(-1.0);
      e.info += v * v.transpose();
    }
  }
  return e;
}

bool bounded(const Problem& p, int k) {
  return p.binary && k < p.layout.n_base();
}

struct NewtonOutcome {
  bool converged = false;
  int iterations = 0;
};

NewtonOutcome newton(const Problem& p, std::vector<double>& th, double sigma) {
  const int m = p.layout.size();
  NewtonOutcome out;
  if (m == 0) {
    out.converged = true;
    return out;
  }
  for (int it = 0; it < p.max_iters; ++it) {
    out.iterations = it + 1;
    auto e = evaluate(p, th, sigma, true, true);
    std::vector<bool> active(m, true);
    double gmax = 0.0;
    for (int k = 0; k < m; ++k) {
      if (p.fixed[k]) active[k] = false;
      if (bounded(p, k) && ((th[k] >= kFitnessCap && e.grad(k) > 0) ||
                            (th[k] <= -kFitnessCap && e.grad(k) < 0)))
        active[k] = false;
      if (!active[k]) {
        e.grad(k) = 0.0;
        e.info.row(k).setZero();
        e.info.col(k).setZero();
        e.info(k, k) = 1.0;
      } else {
        gmax = std::max(gmax, std::abs(e.grad(k)));
      }
    }
    if (gmax < p.tol) {
      out.converged = true;
      break;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(e.info);
    Eigen::VectorXd delta = ldlt.solve(e.grad);
    if (ldlt.info() != Eigen::Success || !delta.allFinite()) {
      e.info.diagonal().array() += 1e-8 * (1.0 + e.info.diagonal().array().abs());
      delta = e.info.ldlt().solve(e.grad);
    }
    if (!delta.allFinite()) break;
    double step = 1.0;
    std::vector<double> cand(th);
    bool accepted = false;
    for (int h = 0; h < 40; ++h) {
      for (int k = 0; k < m; ++k) {
        cand[k] = th[k] + step * delta(k);
        if (bounded(p, k)) cand[k] = std::clamp(cand[k], -kFitnessCap, kFitnessCap);
      }
      const double v = evaluate(p, cand, sigma, false, true).penalized;
      if (std::isfinite(v) && v >= e.penalized - 1e-12 * std::abs(e.penalized)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    double moved = 0.0;
    for (int k = 0; k < m; ++k) moved = std::max(moved, std::abs(cand[k] - th[k]));
    th = cand;
    if (moved < 1e-12) {
      out.converged = true;
      break;
    }
  }
  return out;
}

double best_sigma(const Problem& p, const std::vector<double>& th) {
  std::vector<double> lin(p.units.size());
  for (std::size_t k = 0; k < p.units.size(); ++k) lin[k] = linear_part(p, th, p.units[k]);
  auto neg = [&](double s) {
    const double sigma = std::exp(s);
    double ll = 0.0;
    for (std::size_t k = 0; k < p.units.size(); ++k)
      ll += weight_log_density(p.units[k].y, lin[k], sigma, p.family);
    return -ll;
  };
  return std::exp(boost::math::tools::brent_find_minima(neg, -9.0, 6.0, 40).first);
}

}  // namespace

void add_binary_units(Problem& p, const TemporalNetwork& net, std::size_t begin, std::size_t end,
                      const CovariateSet& cov, const std::vector<double>& fixed_beta) {
  const auto& L = p.layout;
  const int n = net.n_nodes();
  p.obs.assign(L.size(), 0.0);
  p.obs_offset = 0.0;
  p.units.reserve(p.units.size() + (end - begin) * n * (n - 1));
  for (std::size_t t = begin; t < end; ++t) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        Unit u{i, j, 0.0, cov.value(t, i, j), 0.0};
        if (!L.beta) u.offset = link_coefficient(fixed_beta, i, j, n) * u.x;
        p.units.push_back(u);
      }
    }
    for (const auto& e : net.at(t).edges()) {
      const double x = cov.value(t, e.src, e.dst);
      if (L.fitness) {
        p.obs[e.dst] += 1.0;
        p.obs[n + e.src] += 1.0;
      } else if (L.intercept) {
        p.obs[0] += 1.0;
      }
      if (L.beta)
        p.obs[L.beta_index()] += x;
      else
        p.obs_offset += link_coefficient(fixed_beta, e.src, e.dst, n) * x;
    }
  }
}

void add_weight_units(Problem& p, const TemporalNetwork& net, std::size_t begin, std::size_t end,
                      const CovariateSet& cov, const std::vector<double>& fixed_beta) {
  const int n = net.n_nodes();
  for (std::size_t t = begin; t < end; ++t) {
    for (const auto& e : net.at(t).edges()) {
      Unit u{e.src, e.dst, e.weight, cov.value(t, e.src, e.dst), 0.0};
      if (!p.layout.beta) u.offset = link_coefficient(fixed_beta, e.src, e.dst, n) * u.x;
      p.units.push_back(u);
    }
  }
}

void binary_start(Problem& p, const std::vector<double>& deg_in,
                  const std::vector<double>& deg_out, double possible_per_node) {
  const auto& L = p.layout;
  const int n = L.n;
  p.start.assign(L.size(), 0.0);
  p.fixed.assign(L.size(), false);
  double links = 0.0;
  for (double d : deg_out) links += d;
  const double pairs = possible_per_node * n;
  const double dens = std::clamp(links / std::max(pairs, 1.0), 1e-6, 1.0 - 1e-6);
  const double logit = std::log(dens / (1.0 - dens));
  if (L.fitness) {
    for (int g = 0; g < 2; ++g) {
      const auto& deg = g == 0 ? deg_in : deg_out;
      for (int i = 0; i < n; ++i) {
        const int k = g * n + i;
        p.start[k] = 0.5 * logit;
        if (p.ridge > 0.0) continue;
        if (deg[i] == 0.0) {
          p.start[k] = -kFitnessCap;
          p.fixed[k] = true;
        } else if (deg[i] >= possible_per_node) {
          p.start[k] = kFitnessCap;
          p.fixed[k] = true;
        }
      }
    }
  } else if (L.intercept) {
    p.start[0] = logit;
    if (links == 0.0 || links >= pairs) {
      p.start[0] = links == 0.0 ? -kFitnessCap : kFitnessCap;
      p.fixed[0] = true;
    }
  }
}

void weight_start(Problem& p, const std::vector<double>& deg_in,
                  const std::vector<double>& deg_out) {
  const auto& L = p.layout;
  const int n = L.n;
  p.start.assign(L.size(), 0.0);
  p.fixed.assign(L.size(), false);
  double mean = 0.0;
  for (const auto& u : p.units) mean += std::log(u.y);
  if (!p.units.empty()) mean /= static_cast<double>(p.units.size());
  if (L.fitness) {
    for (int g = 0; g < 2; ++g) {
      const auto& deg = g == 0 ? deg_in : deg_out;
      for (int i = 0; i < n; ++i) {
        p.start[g * n + i] = 0.5 * mean;
        if (deg[i] == 0.0) p.fixed[g * n + i] = true;
      }
    }
  } else if (L.intercept) {
    p.start[0] = mean;
    if (p.units.empty()) p.fixed[0] = true;
  }
  if (L.beta && p.units.empty()) p.fixed[L.beta_index()] = true;
}

Solution solve(const Problem& p) {
  Solution s;
  s.theta = p.start;
  const bool free_sigma = !p.binary && p.family != WeightFamily::poisson && !p.fixed_sigma &&
                          !p.units.empty();
  s.sigma = p.fixed_sigma.value_or(1.0);
  s.converged = true;
  const int rounds = free_sigma ? 60 : 1;
  for (int r = 0; r < rounds; ++r) {
    const auto o = newton(p, s.theta, s.sigma);
    s.iterations += o.iterations;
    s.converged = o.converged;
    if (!free_sigma) break;
    const double next = best_sigma(p, s.theta);
    const double change = std::abs(next - s.sigma) / s.sigma;
    s.sigma = next;
    if (p.family == WeightFamily::gamma || change < 1e-10) break;
  }
  if (free_sigma && p.family == WeightFamily::lognormal) {
    const auto o = newton(p, s.theta, s.sigma);
    s.iterations += o.iterations;
    s.converged = s.converged && o.converged;
  }
  auto e = evaluate(p, s.theta, s.sigma, true, true);
  s.loglik = e.ll;
  s.info = std::move(e.info);
  for (int k = 0; k < p.layout.size(); ++k) {
    if (p.fixed[k]) {
      s.info.row(k).setZero();
      s.info.col(k).setZero();
      s.info(k, k) = 1.0;
    }
    if (bounded(p, k) && std::abs(s.theta[k]) >= kFitnessCap) s.saturated = true;
  }
  return s;
}

void write_fitness(FitnessState& f, int g_in, const Problem& p, const Solution& s) {
  const auto& L = p.layout;
  const int n = L.n;
  auto& in = f.group(g_in);
  auto& out = f.group(g_in + 1);
  if (!L.fitness) {
    const double half = L.intercept ? 0.5 * s.theta[0] : 0.0;
    std::fill(in.begin(), in.end(), half);
    std::fill(out.begin(), out.end(), half);
    return;
  }
  for (int g = 0; g < 2; ++g) {
    auto& dst = g == 0 ? in : out;
    double sum = 0.0;
    int active = 0;
    for (int i = 0; i < n; ++i) {
      dst[i] = s.theta[g * n + i];
      if (!p.fixed[g * n + i]) {
        sum += dst[i];
        ++active;
      }
    }
    if (!p.binary && active > 0)
      for (int i = 0; i < n; ++i)
        if (p.fixed[g * n + i]) dst[i] = sum / active;
  }
}

PooledFit pooled_fit(const TemporalNetwork& net, std::size_t begin, std::size_t end,
                     const ModelCovariates& cov, const StaticFitConfig& cfg, bool fitness) {
  const int n = net.n_nodes();
  PooledFit out;
  out.fitness = FitnessState(n);
  out.beta_bin = cfg.beta_bin;
  out.beta_w = cfg.beta_w;
  std::vector<double> din(n, 0.0), dout(n, 0.0);
  for (std::size_t t = begin; t < end; ++t)
    for (const auto& e : net.at(t).edges()) {
      din[e.dst] += 1.0;
      dout[e.src] += 1.0;
    }

  auto make = [&](bool binary, const CovariateSet& c) {
    Problem p;
    p.binary = binary;
    p.family = cfg.family;
    p.layout = {n, fitness, !fitness && cfg.intercept, cfg.estimate_beta && !c.is_none()};
    p.ridge = fitness ? cfg.ridge : 0.0;
    p.fixed_sigma = cfg.fixed_sigma;
    p.max_iters = cfg.max_iters;
    p.tol = cfg.tol;
    return p;
  };

  if (cfg.parts != ModelParts::weight) {
    auto p = make(true, cov.binary);
    add_binary_units(p, net, begin, end, cov.binary, cfg.beta_bin);
    binary_start(p, din, dout, static_cast<double>((end - begin) * (n - 1)));
    out.bin = solve(p);
    out.has_bin = true;
    write_fitness(out.fitness, 0, p, out.bin);
    out.intercept_bin = p.layout.intercept ? out.bin.theta[0] : 0.0;
    if (p.layout.beta) out.beta_bin = {out.bin.theta[p.layout.beta_index()]};
    out.saturated = out.bin.saturated;
    out.converged = out.bin.converged;
    out.iterations += out.bin.iterations;
  }
  if (cfg.parts != ModelParts::binary) {
    auto p = make(false, cov.weight);
    add_weight_units(p, net, begin, end, cov.weight, cfg.beta_w);
    weight_start(p, din, dout);
    out.w = solve(p);
    out.has_w = true;
    write_fitness(out.fitness, 2, p, out.w);
    out.intercept_w = p.layout.intercept ? out.w.theta[0] : 0.0;
    if (p.layout.beta) out.beta_w = {out.w.theta[p.layout.beta_index()]};
    out.sigma = out.w.sigma;
    out.converged = out.converged && out.w.converged;
    out.iterations += out.w.iterations;
  }
  out.fitness = identify(std::move(out.fitness));
  return out;
}

}  // namespace sdnet::detail
