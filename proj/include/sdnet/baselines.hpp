#pragma once

#include <array>
#include <vector>

#include "sdnet/filter.hpp"

namespace sdnet {

inline constexpr int kNumRegressors = 6;

/// Lagged flow regressors of every ordered pair, built from snapshot t - 1:
///   0 own lagged weight Y_ij
///   1 lent by i to all but j
///   2 borrowed by j from all but i
///   3 lent by j to all but i
///   4 borrowed by i from all but j
///   5 total flow among nodes other than i and j
/// Row t = 0 has no predecessor and is absent.
class LinkRegressorPanel {
 public:
  LinkRegressorPanel() = default;
  LinkRegressorPanel(int n_nodes, std::size_t n_times);

  int n_nodes() const { return n_; }
  std::size_t n_times() const { return T_; }
  /// Raw regressors of pair (i, j) at t >= 1.
  const double* row(std::size_t t, int i, int j) const;
  double* row(std::size_t t, int i, int j);

 private:
  int n_ = 0;
  std::size_t T_ = 0;
  std::vector<double> data_;
};

/// Throws "insufficient history" when T < 2.
LinkRegressorPanel build_regressors(const TemporalNetwork& net);

/// Regressors enter the fits as log1p of the raw lagged flows.
std::array<double, kNumRegressors + 1> za_features(const double* raw);

struct ZaLinkFit {
  /// Intercept followed by one coefficient per regressor.
  std::array<double, kNumRegressors + 1> logit{};
  std::array<double, kNumRegressors + 1> ols{};
  double resid_var = 0.0;
  int n_pos = 0;
  int n_obs = 0;
  /// Support below the threshold: base rate and geometric mean instead.
  bool fallback = false;
  /// Training classes are separated or the logistic coefficients hit the cap.
  bool capped = false;
  double base_rate = 0.0;
  double log_geo_mean = 0.0;
};

struct ZaRegConfig {
  int min_pos = 3;
  int min_zero = 3;
  /// Ridge on the slopes of the log-weight regression.
  double ols_ridge = 1.0;
  double coef_cap = 30.0;
  int max_iters = 50;
  double ridge = 1e-6;
};

struct ZaRegFit {
  int n_nodes = 0;
  /// Indexed i * N + j; diagonal entries are unused.
  std::vector<ZaLinkFit> links;

  const ZaLinkFit& link(int i, int j) const { return links.at(static_cast<std::size_t>(i) * n_nodes + j); }
};

/// Independent per-link logistic regression on presence and OLS on log
/// weights, over rows t in [begin, end) with begin >= 1.
ZaRegFit fit_za_regression(const TemporalNetwork& net, const LinkRegressorPanel& panel,
                           std::size_t begin, std::size_t end, const ZaRegConfig& config = {});

struct ZaPrediction {
  double prob = 0.0;
  /// exp(x'b + resid_var / 2).
  double cond_mean = 0.0;
};

ZaPrediction predict_za(const ZaLinkFit& fit, const double* raw);

/// Predictions of every pair from panel row t, with the realized weights
/// when observed is given.
ForecastRecord forecast_za(const ZaRegFit& fit, const LinkRegressorPanel& panel, std::size_t t,
                           const Snapshot* observed = nullptr);

}  // namespace sdnet
