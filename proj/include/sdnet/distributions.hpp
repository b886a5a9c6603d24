#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "sdnet/model.hpp"
#include "sdnet/network.hpp"

namespace sdnet {

inline constexpr double kScaleFloor = 1e-8;
inline constexpr double kScaleCap = 1e6;
inline constexpr double kLogitClamp = 50.0;
inline constexpr double kLogMeanMax = 700.0;

/// Linear predictors of one link.
struct LinkPredictor {
  double logit_p = 0.0;   // bin_out[i] + bin_in[j] + beta_bin X
  double log_mean = 0.0;  // w_out[i] + w_in[j] + beta_w X, log E[Y | Y > 0]
};

double link_probability(const LinkPredictor& pred);
/// log sigmoid(x) and log(1 - sigmoid(x)) without cancellation.
double log_sigmoid(double x);
double log1m_sigmoid(double x);

/// exp(log_mean). Throws NumericalError("predictor overflow") above 700.
double conditional_mean(const LinkPredictor& pred);

/// log g(y) for y > 0, parameterized so the mean is exp(log_mean).
double weight_log_density(double y, double log_mean, double sigma, WeightFamily family);
/// d log g / d log_mean.
double weight_score_term(double y, double log_mean, double sigma, WeightFamily family);
/// -d^2 log g / d log_mean^2.
double weight_curvature_term(double y, double log_mean, double sigma, WeightFamily family);
/// Expectation of weight_curvature_term over y ~ g.
double weight_expected_curvature(double log_mean, double sigma, WeightFamily family);

/// log P(Y = y): log(1 - p) at zero, log p + log g(y) otherwise.
double za_log_density(double y, const LinkPredictor& pred, double sigma, WeightFamily family);

/// One positive draw from g. Poisson draws are conditioned on y >= 1.
double sample_weight(std::mt19937_64& rng, double log_mean, double sigma, WeightFamily family);

struct NodeScores {
  std::vector<double> in;
  std::vector<double> out;
};

/// Log-likelihood split plus gradient and negative Hessian diagonal with
/// respect to the fitness of one snapshot.
struct SnapshotTerms {
  double loglik_bin = 0.0;
  double loglik_w = 0.0;
  FitnessState score;
  FitnessState curvature;

  double loglik() const { return loglik_bin + loglik_w; }
};

/// Evaluates the parts selected by statics.parts in one pass over the pairs.
SnapshotTerms snapshot_terms(const Snapshot& snap, const FitnessState& f,
                             const ModelCovariates& cov, std::size_t t,
                             const StaticParams& statics);

LinkPredictor predictor(const FitnessState& f, const ModelCovariates& cov, std::size_t t,
                        const StaticParams& statics, int i, int j);

NodeScores binary_score(const Snapshot& snap, const FitnessState& f, const CovariateSet& cov,
                        std::size_t t, const std::vector<double>& beta_bin);
NodeScores weight_score(const Snapshot& snap, const FitnessState& f, const CovariateSet& cov,
                        std::size_t t, const std::vector<double>& beta_w, double sigma,
                        WeightFamily family);

/// curvature^(-power) floored at kScaleFloor and capped at kScaleCap,
/// flat layout [bin_in, bin_out, w_in, w_out].
std::vector<double> scaling_diag(const SnapshotTerms& terms, double power);
std::vector<double> scaling_diag(const Snapshot& snap, const FitnessState& f,
                                 const ModelCovariates& cov, std::size_t t,
                                 const StaticParams& statics);

double snapshot_loglik(const Snapshot& snap, const FitnessState& f, const ModelCovariates& cov,
                       std::size_t t, const StaticParams& statics);

/// Independent draw of every ordered pair i != j.
Snapshot sample_snapshot(const FitnessState& f, const ModelCovariates& cov, std::size_t t,
                         const StaticParams& statics, std::mt19937_64& rng);
Snapshot sample_snapshot(const FitnessState& f, const ModelCovariates& cov, std::size_t t,
                         const StaticParams& statics, std::uint64_t seed);

}  // namespace sdnet
