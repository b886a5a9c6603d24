#include "sdnet/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace sdnet {

namespace {

template <typename Fn>
double log_error_mean(const std::vector<ForecastRecord>& records, Fn&& loss) {
  double sum = 0.0;
  long count = 0;
  for (const auto& r : records)
    for (const auto& e : r.entries)
      if (e.observed > 0.0) {
        sum += loss(std::log(e.cond_mean) - std::log(e.observed));
        ++count;
      }
  if (count == 0) throw std::invalid_argument("no positive observations");
  return sum / static_cast<double>(count);
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

double mse_log(const std::vector<ForecastRecord>& records) {
  return log_error_mean(records, [](double d) { return d * d; });
}

double mad_log(const std::vector<ForecastRecord>& records) {
  return log_error_mean(records, [](double d) { return std::abs(d); });
}

double record_mse_log(const ForecastRecord& record) {
  double sum = 0.0;
  long count = 0;
  for (const auto& e : record.entries)
    if (e.observed > 0.0) {
      const double d = std::log(e.cond_mean) - std::log(e.observed);
      sum += d * d;
      ++count;
    }
  return count ? sum / static_cast<double>(count) : std::numeric_limits<double>::quiet_NaN();
}

double auc(const std::vector<int>& labels, const std::vector<double>& scores) {
  if (labels.size() != scores.size()) throw std::invalid_argument("auc: length mismatch");
  const auto ranks = average_ranks(scores);
  double pos = 0.0, rank_sum = 0.0;
  for (std::size_t k = 0; k < labels.size(); ++k)
    if (labels[k]) {
      pos += 1.0;
      rank_sum += ranks[k];
    }
  const double neg = static_cast<double>(labels.size()) - pos;
  if (pos == 0.0 || neg == 0.0) throw std::invalid_argument("degenerate labels");
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

double forecast_auc(const std::vector<ForecastRecord>& records, bool per_time) {
  std::vector<int> labels;
  std::vector<double> scores;
  if (!per_time) {
    for (const auto& r : records)
      for (const auto& e : r.entries) {
        labels.push_back(e.observed > 0.0);
        scores.push_back(e.prob);
      }
    return auc(labels, scores);
  }
  double sum = 0.0;
  int used = 0;
  for (const auto& r : records) {
    labels.clear();
    scores.clear();
    int pos = 0;
    for (const auto& e : r.entries) {
      labels.push_back(e.observed > 0.0);
      scores.push_back(e.prob);
      pos += labels.back();
    }
    if (pos == 0 || pos == static_cast<int>(labels.size())) continue;
    sum += auc(labels, scores);
    ++used;
  }
  if (used == 0) throw std::invalid_argument("degenerate labels");
  return sum / used;
}

std::vector<std::pair<double, double>> roc_points(const std::vector<int>& labels,
                                                  const std::vector<double>& scores) {
  if (labels.size() != scores.size()) throw std::invalid_argument("roc: length mismatch");
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
  const double pos = std::count_if(labels.begin(), labels.end(), [](int l) { return l != 0; });
  const double neg = static_cast<double>(labels.size()) - pos;
  if (pos == 0.0 || neg == 0.0) throw std::invalid_argument("degenerate labels");
  std::vector<std::pair<double, double>> pts{{0.0, 0.0}};
  double tp = 0.0, fp = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    (labels[order[k]] ? tp : fp) += 1.0;
    if (k + 1 == order.size() || scores[order[k + 1]] != scores[order[k]])
      pts.emplace_back(fp / neg, tp / pos);
  }
  return pts;
}

double bic(double loglik, int n_params, long n_obs) {
  if (n_obs < 1) throw std::invalid_argument("bic: n_obs must be >= 1");
  return n_params * std::log(static_cast<double>(n_obs)) - 2.0 * loglik;
}

TestResult diebold_mariano(const std::vector<double>& loss1, const std::vector<double>& loss2,
                           int horizon) {
  if (loss1.size() != loss2.size()) throw std::invalid_argument("diebold_mariano: length mismatch");
  if (loss1.size() < 10) throw std::invalid_argument("diebold_mariano: need at least 10 losses");
  if (horizon < 1) throw std::invalid_argument("diebold_mariano: horizon must be >= 1");
  const std::size_t T = loss1.size();
  std::vector<double> d(T);
  for (std::size_t t = 0; t < T; ++t) d[t] = loss1[t] - loss2[t];
  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(T);
  auto gamma = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t t = lag; t < T; ++t) s += (d[t] - mean) * (d[t - lag] - mean);
    return s / static_cast<double>(T);
  };
  const std::size_t lags = std::min<std::size_t>(horizon - 1, T - 1);
  double lrv = gamma(0);
  for (std::size_t k = 1; k <= lags; ++k)
    lrv += 2.0 * (1.0 - static_cast<double>(k) / (lags + 1.0)) * gamma(k);
  const double scale = std::max(1.0, std::abs(mean));
  if (!(lrv > 1e-28 * scale * scale)) {
    if (std::abs(mean) <= 1e-14 * scale) return {0.0, 1.0};
    return {mean > 0 ? std::numeric_limits<double>::infinity()
                     : -std::numeric_limits<double>::infinity(),
            0.0};
  }
  const double h = horizon;
  const double Td = static_cast<double>(T);
  const double hln = std::sqrt((Td + 1.0 - 2.0 * h + h * (h - 1.0) / Td) / Td);
  const double stat = hln * mean / std::sqrt(lrv / Td);
  const boost::math::students_t dist(Td - 1.0);
  const double p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(stat)));
  return {stat, std::min(1.0, p)};
}

std::vector<double> average_ranks(const std::vector<double>& x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t k = 0; k < order.size();) {
    std::size_t m = k;
    while (m + 1 < order.size() && x[order[m + 1]] == x[order[k]]) ++m;
    const double r = 0.5 * static_cast<double>(k + m) + 1.0;
    for (std::size_t q = k; q <= m; ++q) ranks[order[q]] = r;
    k = m + 1;
  }
  return ranks;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman: length mismatch");
  if (x.size() < 3) throw std::invalid_argument("spearman: need at least 3 pairs");
  auto constant = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [&](double e) { return e == v.front(); });
  };
  if (constant(x) || constant(y)) throw std::invalid_argument("undefined ranks");
  return pearson(average_ranks(x), average_ranks(y));
}

double spearman_p_value(double rho, std::size_t n) {
  if (n < 3) throw std::invalid_argument("spearman: need at least 3 pairs");
  if (std::abs(rho) >= 1.0) return 0.0;
  const double df = static_cast<double>(n) - 2.0;
  const double t = rho * std::sqrt(df / (1.0 - rho * rho));
  const boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

TestResult ks_two_sample(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::vector<double> x = a, y = b;
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double na = static_cast<double>(x.size()), nb = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  const double en = std::sqrt(na * nb / (na + nb));
  const double lambda = (en + 0.12 + 0.11 / en) * d;
  // Kolmogorov survival function, 2 sum (-1)^(k-1) exp(-2 k^2 lambda^2)
  double p = 1.0;
  if (lambda > 1e-3) {
    p = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
      const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
      p += term;
      if (std::abs(term) < 1e-16) break;
      sign = -sign;
    }
    p = std::clamp(2.0 * p, 0.0, 1.0);
  }
  return {d, p};
}

double sign_test(int wins, int n) {
  if (n < 1 || wins < 0 || wins > n) throw std::invalid_argument("sign_test: need 0 <= wins <= n");
  if (wins == 0) return 1.0;
  const boost::math::binomial dist(n, 0.5);
  return boost::math::cdf(boost::math::complement(dist, wins - 1));
}

}  // namespace sdnet
