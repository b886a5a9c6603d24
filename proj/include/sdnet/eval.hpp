#pragma once

#include <utility>
#include <vector>

#include "sdnet/filter.hpp"

namespace sdnet {

/// Ratio of sums over every observed positive link of all records:
/// sum (log cond_mean - log y)^2 / count. Throws "no positive observations".
double mse_log(const std::vector<ForecastRecord>& records);
double mad_log(const std::vector<ForecastRecord>& records);

/// Mean squared log error of one record, NaN without positive links.
double record_mse_log(const ForecastRecord& record);

/// Mann-Whitney AUC with half credit for tied scores.
/// Throws "degenerate labels" unless both classes occur.
double auc(const std::vector<int>& labels, const std::vector<double>& scores);

/// AUC of forecast probabilities against link presence, pooled over all
/// records or averaged over per-record values (records with a single class
/// are skipped in that case).
double forecast_auc(const std::vector<ForecastRecord>& records, bool per_time = false);

/// ROC curve as (false positive rate, true positive rate) points, one per
/// distinct score, from (0,0) to (1,1).
std::vector<std::pair<double, double>> roc_points(const std::vector<int>& labels,
                                                  const std::vector<double>& scores);

/// k ln(n) - 2 loglik.
double bic(double loglik, int n_params, long n_obs);

struct TestResult {
  double stat = 0.0;
  double p_value = 1.0;
};

/// Diebold-Mariano test of equal expected loss. Positive statistics mean
/// loss1 is larger on average. Newey-West variance with Bartlett weights and
/// horizon - 1 lags, Harvey-Leybourne-Newbold correction, two-sided Student t
/// with T - 1 degrees of freedom. A constant differential gives stat 0 and
/// p 1 when it is zero, and an infinite stat with p 0 otherwise.
TestResult diebold_mariano(const std::vector<double>& loss1, const std::vector<double>& loss2,
                           int horizon = 1);

/// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> average_ranks(const std::vector<double>& x);

/// Throws "undefined ranks" when either input is constant.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Two-sided p-value of a Spearman correlation via the t approximation
/// with n - 2 degrees of freedom.
double spearman_p_value(double rho, std::size_t n);

/// Two-sample Kolmogorov-Smirnov statistic with the asymptotic p-value.
TestResult ks_two_sample(const std::vector<double>& a, const std::vector<double>& b);

/// P(X >= wins) for X ~ Binomial(n, 1/2).
double sign_test(int wins, int n);

}  // namespace sdnet
