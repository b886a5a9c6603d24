#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sdnet/filter.hpp"
#include "sdnet/optimizer.hpp"

namespace sdnet {

inline constexpr double kFitnessCap = 30.0;

/// Output of every estimator. Static models leave path empty and store their
/// time-constant fitness in `fitness`; score-driven fits store f0 there.
/// For static models statics.w/b/a are empty and only beta, sigma and family
/// are meaningful.
struct FitResult {
  std::string model;
  StaticParams statics;
  FitnessPath path;
  FitnessState fitness;
  double loglik = 0.0;
  double loglik_bin = 0.0;
  double loglik_w = 0.0;
  int n_params = 0;
  int n_params_bin = 0;
  int n_params_w = 0;
  /// BIC observation counts: pair-time observations and positive links.
  long n_obs_bin = 0;
  long n_obs_w = 0;
  std::map<std::string, double> estimates;
  std::map<std::string, double> std_errors;
  bool converged = false;
  int iterations = 0;
  std::vector<std::string> warnings;

  /// NaN when the name is unknown.
  double estimate(const std::string& name) const;
  double std_error(const std::string& name) const;
};

struct SdFitConfig {
  WeightFamily family = WeightFamily::gamma;
  TieMode tie_mode = TieMode::per_group;
  ModelParts parts = ModelParts::both;
  double scaling_power = 1.0;
  Curvature curvature = Curvature::expected;
  bool node_specific_beta = false;
  std::size_t min_times = 10;
  /// f0 is the pooled static fit over the first init_window snapshots.
  std::size_t init_window = 10;
  double init_ridge = 0.1;
  bool std_errors = true;
  OptimOptions optim;
  /// Warm start for the statics and a fixed initial state.
  std::optional<StaticParams> start;
  std::optional<FitnessState> f0;
  std::optional<double> fixed_sigma;
};

/// Maximum likelihood of the score-driven model. The binary and weighted
/// halves share no parameters and are optimized separately.
FitResult fit_sd(const TemporalNetwork& net, const ModelCovariates& cov,
                 const SdFitConfig& config = {});

struct StaticFitConfig {
  WeightFamily family = WeightFamily::gamma;
  ModelParts parts = ModelParts::both;
  bool estimate_beta = true;
  std::vector<double> beta_bin{0.0};
  std::vector<double> beta_w{0.0};
  std::optional<double> fixed_sigma;
  /// Penalty 0.5 * ridge * sum (f_i - mean of its group)^2 on the fitness.
  double ridge = 0.0;
  /// No-fitness model: a global intercept per part, or none at all.
  bool intercept = true;
  int max_iters = 200;
  double tol = 1e-9;
};

/// Pooled MLE with time-constant fitness.
FitResult fit_constant(const TemporalNetwork& net, const ModelCovariates& cov,
                       const StaticFitConfig& config = {});

/// Pooled MLE without node heterogeneity.
FitResult fit_nofitness(const TemporalNetwork& net, const ModelCovariates& cov,
                        const StaticFitConfig& config = {});

struct SnapshotFit {
  FitnessState fitness;
  double sigma = 1.0;
  /// Some binary fitness hit the +-kFitnessCap bound.
  bool saturated = false;
  bool converged = false;
  int iterations = 0;
};

/// Static MLE of one snapshot (t indexes cov). beta is held at the values in
/// config; asking for its estimation with a scalar covariate throws
/// "unidentified: c1+c2+c3 degeneracy".
SnapshotFit fit_snapshot(const Snapshot& snap, const ModelCovariates& cov, std::size_t t,
                         const StaticFitConfig& config = {});

struct SnapshotSequence {
  FitnessPath path;
  std::vector<bool> carried;
  std::vector<bool> saturated;
  std::vector<double> sigma;
};

/// fit_snapshot for every t. Snapshots without at least one link and one
/// non-link carry the neighbouring state and are flagged.
SnapshotSequence fit_snapshot_sequence(const TemporalNetwork& net, const ModelCovariates& cov,
                                       const StaticFitConfig& config = {}, int threads = 1);

struct Ar1Fit {
  double b0 = 0.0;
  double b1 = 0.0;
  double resid_var = 0.0;
  double se_b1 = 0.0;
  std::size_t n = 0;
};

/// OLS of x[t+1] on (1, x[t]). Throws "degenerate AR(1)" on constant input.
Ar1Fit fit_ar1(const std::vector<double>& series);
double forecast_ar1(const Ar1Fit& fit, double last);

/// Score-driven Poisson fit driven only by degrees and strengths. The
/// binary half is the exact likelihood; the weighted half uses the per-node
/// expression sum_k s_k eta_k - d_k exp(eta_k). Only scalar binary
/// covariates are supported.
FitResult fit_poisson_margins(const Margins& margins, const CovariateSet& binary_cov,
                              const SdFitConfig& config = {});

/// Per-node pseudo log-likelihood terms used by fit_poisson_margins.
SnapshotTerms margins_terms(const Margins& m, std::size_t t, const FitnessState& f,
                            const CovariateSet& binary_cov, const StaticParams& statics);

}  // namespace sdnet
