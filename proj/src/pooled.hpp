#pragma once

// Newton solvers for the pooled static likelihoods shared by the constant,
// no-fitness and single-snapshot estimators and by the score-driven warm start.

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "sdnet/estimate.hpp"

namespace sdnet::detail {

/// One observation unit: a pair (binary half) or a present link (weighted
/// half). offset carries the fixed part of the covariate term; y is unused
/// by the binary half, which works from sufficient statistics.
struct Unit {
  int i = 0;
  int j = 0;
  double y = 0.0;
  double x = 0.0;
  double offset = 0.0;
};

/// Parameter layout: [in(N), out(N)] fitness or one intercept (or nothing),
/// then an optional uniform beta.
struct Layout {
  int n = 0;
  bool fitness = true;
  bool intercept = false;
  bool beta = false;

  int n_base() const { return fitness ? 2 * n : (intercept ? 1 : 0); }
  int size() const { return n_base() + (beta ? 1 : 0); }
  int beta_index() const { return n_base(); }
};

struct Problem {
  Layout layout;
  bool binary = true;
  WeightFamily family = WeightFamily::gamma;
  std::vector<Unit> units;
  /// Binary half: sum over units of y times each feature, and of y * offset.
  std::vector<double> obs;
  double obs_offset = 0.0;
  /// Parameters held at their start value.
  std::vector<bool> fixed;
  std::vector<double> start;
  double ridge = 0.0;
  std::optional<double> fixed_sigma;
  int max_iters = 200;
  double tol = 1e-9;
};

struct Solution {
  std::vector<double> theta;
  double sigma = 1.0;
  double loglik = 0.0;
  /// Negative Hessian of the unpenalized log-likelihood at theta.
  Eigen::MatrixXd info;
  bool saturated = false;
  bool converged = false;
  int iterations = 0;
};

/// Pairs of snapshots [begin, end) for the binary half, with sufficient
/// statistics filled in p.obs.
void add_binary_units(Problem& p, const TemporalNetwork& net, std::size_t begin, std::size_t end,
                      const CovariateSet& cov, const std::vector<double>& fixed_beta);
/// Present links of snapshots [begin, end) for the weighted half.
void add_weight_units(Problem& p, const TemporalNetwork& net, std::size_t begin, std::size_t end,
                      const CovariateSet& cov, const std::vector<double>& fixed_beta);

/// Start values and pinned entries. Binary: with zero ridge, nodes never
/// (always) linked in a direction are pinned at -cap (+cap). Weighted: nodes
/// without links in a direction are pinned.
void binary_start(Problem& p, const std::vector<double>& deg_in,
                  const std::vector<double>& deg_out, double possible_per_node);
void weight_start(Problem& p, const std::vector<double>& deg_in,
                  const std::vector<double>& deg_out);

Solution solve(const Problem& p);

/// Writes a solved fitness layout into groups (g_in, g_out) of f. Pinned
/// weighted entries take the mean of the active entries of their group.
void write_fitness(FitnessState& f, int g_in, const Problem& p, const Solution& s);

/// Pooled fit of snapshots [begin, end) with time-constant fitness (or a
/// global intercept when fitness is false).
struct PooledFit {
  FitnessState fitness;
  double intercept_bin = 0.0;
  double intercept_w = 0.0;
  std::vector<double> beta_bin{0.0};
  std::vector<double> beta_w{0.0};
  double sigma = 1.0;
  Solution bin;
  Solution w;
  bool has_bin = false;
  bool has_w = false;
  bool saturated = false;
  bool converged = true;
  int iterations = 0;
};

PooledFit pooled_fit(const TemporalNetwork& net, std::size_t begin, std::size_t end,
                     const ModelCovariates& cov, const StaticFitConfig& cfg, bool fitness);

}  // namespace sdnet::detail
