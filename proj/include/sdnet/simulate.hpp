#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sdnet/estimate.hpp"

namespace sdnet {

enum class DgpKind { sd_self, ar1_fitness, sin_fitness, static_fitness, persistence_cov, omitted_variable };

std::string to_string(DgpKind k);
DgpKind parse_dgp_kind(const std::string& s);

/// Scalar AR(1) covariate x[t+1] = mean (1 - b1) + b1 x[t] + N(0, noise_sd^2).
struct CovariateDgp {
  double mean = 1.0;
  double b1 = 0.98;
  double noise_sd = 0.1;
};

struct DgpSpec {
  DgpKind kind = DgpKind::ar1_fitness;
  int n_nodes = 30;
  std::size_t n_times = 150;
  /// Mean level of each fitness group (bin_in, bin_out, w_in, w_out).
  std::array<double, 4> targets{-1.5, -1.5, 0.5, 0.5};
  /// Standard deviation of the node-level offsets around the group target.
  double level_spread = 0.5;
  double ar1_b1 = 0.98;
  double noise_sd = 0.1;
  double sin_amplitude = 1.0;
  double sin_period = 75.0;
  /// Recursion parameters of the sd-self DGP, per group.
  std::array<double, 4> sd_b{0.95, 0.95, 0.95, 0.95};
  std::array<double, 4> sd_a{0.1, 0.1, 0.1, 0.1};
  double beta_bin = 0.0;
  double beta_w = 0.0;
  /// Coefficients of the withheld covariate of the omitted-variable DGP.
  double beta2_bin = -3.75;
  double beta2_w = 3.0;
  /// Attach scalar AR(1) covariates even when the betas are zero.
  bool covariates = false;
  CovariateDgp covariate;
  WeightFamily family = WeightFamily::gamma;
  double sigma = 2.0;
  std::uint64_t seed = 1;

  void validate() const;
};

struct Simulation {
  TemporalNetwork net;
  /// True fitness path. For the omitted-variable DGP it carries the
  /// withheld covariate term split evenly over in and out.
  FitnessPath truth;
  /// Observed covariates.
  ModelCovariates cov;
  StaticParams statics;
};

/// Independent seed for stream k of a base seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// AR(1), sinusoid or constant paths per fitness coordinate (sd-self and
/// covariate-driven kinds use the constant levels as their start).
FitnessPath gen_fitness_paths(const DgpSpec& spec);

CovariateSet gen_ar1_covariate(const std::string& name, std::size_t n_times,
                               const CovariateDgp& dgp, std::uint64_t seed);

/// Samples every snapshot from the given path.
TemporalNetwork gen_network(const DgpSpec& spec, const FitnessPath& path,
                            const ModelCovariates& cov);

Simulation simulate(const DgpSpec& spec);

/// Interbank-like network: N=100, T=298, about 6% density and log-normal
/// weights spanning roughly five decades.
DgpSpec emid_like_preset();

/// Mean over t and nodes of squared differences between identified paths,
/// for groups [g_begin, g_end).
double path_mse(const FitnessPath& truth, const FitnessPath& est, int g_begin, int g_end);

struct ExperimentRow {
  std::string experiment;
  std::string dgp;
  std::string filter;
  std::string metric;
  int replication = 0;
  double value = 0.0;
};

struct ExperimentReport {
  std::string name;
  int n_reps = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<ExperimentRow> rows;
  std::vector<std::string> failures;

  std::vector<double> values(const std::string& dgp, const std::string& filter,
                             const std::string& metric) const;
  double mean(const std::string& dgp, const std::string& filter, const std::string& metric) const;
  /// Text table laid out as dgp/filter columns and metric rows.
  std::string table() const;
};

struct ExperimentConfig {
  DgpSpec dgp;
  int n_reps = 10;
  int threads = 1;
  SdFitConfig sd;
};

/// SD vs single-snapshot filtering of AR(1) and sinusoidal fitness.
ExperimentReport run_experiment1(const ExperimentConfig& config);
/// beta recovery, constant vs SD fitness, under AR(1) scalar and
/// persistence covariates.
ExperimentReport run_experiment2(const ExperimentConfig& config);
/// beta_1 recovery with a withheld covariate: no fitness, constant, SD.
ExperimentReport run_experiment3(const ExperimentConfig& config);

/// Experiment 1 defaults: N=30, T=150.
ExperimentConfig experiment1_defaults();
/// Experiment 2 defaults: N=30, T=150, beta_bin = beta_w = 1.
ExperimentConfig experiment2_defaults();
/// Experiment 3 defaults: N=30, T=150, no fitness, two AR(1) covariates.
ExperimentConfig experiment3_defaults();

}  // namespace sdnet
