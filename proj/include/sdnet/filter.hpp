#pragma once

#include <optional>
#include <vector>

#include "sdnet/distributions.hpp"

namespace sdnet {

/// Filtered fitness over time. states[t] is the fitness used to evaluate
/// snapshot t; next is the state after the last update (the one-step
/// forecast state).
struct FitnessPath {
  std::vector<FitnessState> states;
  std::vector<double> per_step_loglik;
  std::vector<double> per_step_bin;
  std::vector<double> per_step_w;
  FitnessState next;

  std::size_t n_times() const { return states.size(); }
  double total() const;
  double total_bin() const;
  double total_w() const;
};

/// Equalizes sum(in) and sum(out) within the binary and the weighted pair of
/// groups by shifting in by -c and out by +c.
FitnessState identify(FitnessState f);

/// w + b*f + a*(scaling*score), elementwise, followed by identify(). Groups
/// excluded by statics.parts are carried over unchanged. Throws
/// NumericalError("divergent update") naming the first non-finite node.
FitnessState sd_update(const FitnessState& f, const SnapshotTerms& terms,
                       const StaticParams& statics);

/// One recursion step driven by snapshot t.
FitnessState sd_step(const FitnessState& f, const Snapshot& snap, const ModelCovariates& cov,
                     std::size_t t, const StaticParams& statics);

/// Runs the recursion from f0 over all snapshots of net.
FitnessPath filter_path(const TemporalNetwork& net, const ModelCovariates& cov,
                        const StaticParams& statics, const FitnessState& f0);

struct ForecastEntry {
  int src = 0;
  int dst = 0;
  double prob = 0.0;
  double cond_mean = 0.0;
  double observed = 0.0;
};

/// Forecasts for every ordered pair at time t, with the realized weights
/// when an observation was supplied.
struct ForecastRecord {
  std::size_t t = 0;
  std::vector<ForecastEntry> entries;
  bool has_observation = false;
};

/// Evaluates p_ij and E[Y_ij | Y_ij > 0] at state f and time t of cov.
ForecastRecord forecast_from_state(const FitnessState& f, const ModelCovariates& cov,
                                   std::size_t t, const StaticParams& statics,
                                   const Snapshot* observed = nullptr);

/// Steps f_T with snapshot t_T and forecasts time t_T + 1, which must be
/// covered by cov.
ForecastRecord forecast_one_step(const FitnessState& f_T, const Snapshot& snap_T,
                                 const ModelCovariates& cov, std::size_t t_T,
                                 const StaticParams& statics,
                                 const Snapshot* observed = nullptr);

}  // namespace sdnet
