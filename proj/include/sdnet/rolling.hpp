#pragma once

#include <map>
#include <string>
#include <vector>

#include "sdnet/baselines.hpp"
#include "sdnet/estimate.hpp"

namespace sdnet {

enum class ForecastModel { sd, ss_ar1, constant, nofitness, zareg };

std::string to_string(ForecastModel m);
ForecastModel parse_forecast_model(const std::string& s);

/// Snapshots [0, limit] of a network. Reading a later snapshot throws
/// std::out_of_range, so code holding a view cannot look ahead.
class HistoryView {
 public:
  HistoryView(const TemporalNetwork& net, std::size_t limit);

  std::size_t limit() const { return limit_; }
  int n_nodes() const { return net_->n_nodes(); }
  const Snapshot& at(std::size_t t) const;
  /// Snapshots [begin, end) as a network; end must not exceed limit + 1.
  TemporalNetwork window(std::size_t begin, std::size_t end) const;

 private:
  const TemporalNetwork* net_;
  std::size_t limit_;
};

struct RollingConfig {
  std::size_t window = 100;
  std::vector<ForecastModel> models{ForecastModel::sd, ForecastModel::ss_ar1};
  WeightFamily family = WeightFamily::gamma;
  /// Re-estimate static parameters every refit_every forecasts. Filtered
  /// states are always advanced to the forecast origin.
  std::size_t refit_every = 1;
  /// Halves estimated by the score-driven model. With `weight` its link
  /// probabilities come from the unfiltered initial binary state.
  ModelParts sd_parts = ModelParts::both;
  SdFitConfig sd;
  /// Forecast origins t run from window - 1 to last_origin (default T - 2).
  std::size_t last_origin = 0;
  int threads = 1;
};

struct RollingResult {
  /// Forecast of t + 1 from data up to t, one record per origin.
  std::map<ForecastModel, std::vector<ForecastRecord>> forecasts;
  std::vector<std::string> warnings;
};

/// Rolling one-step-ahead forecasts on windows [t - window + 1, t].
RollingResult rolling_forecast(const TemporalNetwork& net, const ModelCovariates& cov,
                               const RollingConfig& config);

/// Per-record mean squared log error of two forecast sequences over the
/// records where both have positive observations.
std::pair<std::vector<double>, std::vector<double>> paired_losses(
    const std::vector<ForecastRecord>& a, const std::vector<ForecastRecord>& b);

struct SupportBin {
  double support_lo = 0.0;
  double support_hi = 0.0;
  double mse_log = 0.0;
  long count = 0;
};

/// Splits the observed positive forecast entries into n_bins quantile bins
/// of their link's training support (share of nonzero weights in the window
/// preceding the forecast) and reports the log-MSE per bin.
std::vector<SupportBin> support_bins(const std::vector<ForecastRecord>& records,
                                     const TemporalNetwork& net, std::size_t window,
                                     int n_bins = 10);

}  // namespace sdnet
