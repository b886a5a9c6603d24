#include "sdnet/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "sdnet/distributions.hpp"

namespace sdnet {

LinkRegressorPanel::LinkRegressorPanel(int n_nodes, std::size_t n_times)
    : n_(n_nodes), T_(n_times),
      data_(n_times * static_cast<std::size_t>(n_nodes) * n_nodes * kNumRegressors, 0.0) {}

const double* LinkRegressorPanel::row(std::size_t t, int i, int j) const {
  if (t == 0 || t >= T_) throw std::out_of_range("regressor row t out of range");
  return data_.data() + ((t * n_ + i) * static_cast<std::size_t>(n_) + j) * kNumRegressors;
}

double* LinkRegressorPanel::row(std::size_t t, int i, int j) {
  return const_cast<double*>(std::as_const(*this).row(t, i, j));
}

LinkRegressorPanel build_regressors(const TemporalNetwork& net) {
  if (net.n_times() < 2) throw std::invalid_argument("insufficient history");
  const int n = net.n_nodes();
  LinkRegressorPanel panel(n, net.n_times());
  for (std::size_t t = 1; t < net.n_times(); ++t) {
    const auto& prev = net.at(t - 1);
    const auto y = prev.dense();
    std::vector<double> out(n, 0.0), in(n, 0.0);
    double total = 0.0;
    for (const auto& e : prev.edges()) {
      out[e.src] += e.weight;
      in[e.dst] += e.weight;
      total += e.weight;
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const double yij = y[static_cast<std::size_t>(i) * n + j];
        const double yji = y[static_cast<std::size_t>(j) * n + i];
        double* r = panel.row(t, i, j);
        r[0] = yij;
        r[1] = out[i] - yij;
        r[2] = in[j] - yij;
        r[3] = out[j] - yji;
        r[4] = in[i] - yji;
        r[5] = total - out[i] - in[i] - out[j] - in[j] + yij + yji;
        for (int k = 1; k < kNumRegressors; ++k) r[k] = std::max(0.0, r[k]);
      }
  }
  return panel;
}

std::array<double, kNumRegressors + 1> za_features(const double* raw) {
  std::array<double, kNumRegressors + 1> x{};
  x[0] = 1.0;
  for (int k = 0; k < kNumRegressors; ++k) x[k + 1] = std::log1p(raw[k]);
  return x;
}

namespace {

constexpr int P = kNumRegressors + 1;

// Newton-Raphson logistic regression with a small ridge on the slopes.
void fit_logistic(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const ZaRegConfig& cfg,
                  ZaLinkFit& fit) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(P);
  const double rate = std::clamp(y.mean(), 1e-6, 1.0 - 1e-6);
  beta(0) = std::log(rate / (1.0 - rate));
  Eigen::VectorXd ridge = Eigen::VectorXd::Constant(P, cfg.ridge);
  ridge(0) = 0.0;
  for (int it = 0; it < cfg.max_iters; ++it) {
    const Eigen::VectorXd eta = X * beta;
    Eigen::VectorXd p(eta.size()), w(eta.size());
    for (Eigen::Index k = 0; k < eta.size(); ++k) {
      p(k) = link_probability({eta(k), 0.0});
      w(k) = std::max(p(k) * (1.0 - p(k)), 1e-12);
    }
    const Eigen::VectorXd grad = X.transpose() * (y - p) - ridge.cwiseProduct(beta);
    Eigen::MatrixXd H = X.transpose() * w.asDiagonal() * X;
    H.diagonal() += ridge + Eigen::VectorXd::Constant(P, 1e-10);
    const Eigen::VectorXd step = H.ldlt().solve(grad);
    if (!step.allFinite()) break;
    beta += step;
    if (beta.cwiseAbs().maxCoeff() > cfg.coef_cap) {
      fit.capped = true;
      beta = beta.cwiseMax(-cfg.coef_cap).cwiseMin(cfg.coef_cap);
      break;
    }
    if (step.cwiseAbs().maxCoeff() < 1e-8) break;
  }
  // perfectly classified rows mean the unpenalized MLE diverges
  const Eigen::VectorXd eta = X * beta;
  bool separated = true;
  for (Eigen::Index k = 0; k < eta.size() && separated; ++k)
    separated = y(k) > 0.5 ? eta(k) > 0.0 : eta(k) < 0.0;
  if (separated) fit.capped = true;
  for (int k = 0; k < P; ++k) fit.logit[k] = beta(k);
}

void fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double ridge, ZaLinkFit& fit) {
  Eigen::MatrixXd A = X.transpose() * X;
  A.diagonal().tail(P - 1).array() += ridge;
  A.diagonal().array() += 1e-10;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  const Eigen::VectorXd beta = ldlt.solve(X.transpose() * y);
  const double ssr = (y - X * beta).squaredNorm();
  const double df = (X * ldlt.solve(X.transpose())).trace();
  const double dof = static_cast<double>(X.rows()) - df;
  fit.resid_var = dof > 0.5 ? ssr / dof : 0.0;
  for (int k = 0; k < P; ++k) fit.ols[k] = beta(k);
}

}  // namespace

ZaRegFit fit_za_regression(const TemporalNetwork& net, const LinkRegressorPanel& panel,
                           std::size_t begin, std::size_t end, const ZaRegConfig& config) {
  if (begin < 1) throw std::invalid_argument("za regression rows start at t = 1");
  if (end > net.n_times() || end > panel.n_times() || begin >= end)
    throw std::invalid_argument("za regression window out of range");
  const int n = net.n_nodes();
  const auto rows = static_cast<Eigen::Index>(end - begin);

  double global_sum = 0.0, global_sq = 0.0;
  long global_n = 0;
  for (std::size_t t = begin; t < end; ++t)
    for (const auto& e : net.at(t).edges()) {
      const double l = std::log(e.weight);
      global_sum += l;
      global_sq += l * l;
      ++global_n;
    }
  const double global_mean = global_n ? global_sum / global_n : 0.0;
  const double global_var =
      global_n > 1 ? std::max(0.0, global_sq / global_n - global_mean * global_mean) : 0.0;

  ZaRegFit fit;
  fit.n_nodes = n;
  fit.links.resize(static_cast<std::size_t>(n) * n);
  std::vector<std::vector<double>> dense(end - begin);
  for (std::size_t t = begin; t < end; ++t) dense[t - begin] = net.at(t).dense();

  Eigen::MatrixXd X(rows, P);
  Eigen::VectorXd present(rows);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      auto& lf = fit.links[static_cast<std::size_t>(i) * n + j];
      std::vector<Eigen::Index> pos_rows;
      for (Eigen::Index r = 0; r < rows; ++r) {
        const std::size_t t = begin + static_cast<std::size_t>(r);
        const auto x = za_features(panel.row(t, i, j));
        for (int k = 0; k < P; ++k) X(r, k) = x[k];
        const double y = dense[r][static_cast<std::size_t>(i) * n + j];
        present(r) = y > 0.0;
        if (y > 0.0) pos_rows.push_back(r);
      }
      lf.n_obs = static_cast<int>(rows);
      lf.n_pos = static_cast<int>(pos_rows.size());
      double log_sum = 0.0, log_sq = 0.0;
      for (auto r : pos_rows) {
        const double l = std::log(dense[r][static_cast<std::size_t>(i) * n + j]);
        log_sum += l;
        log_sq += l * l;
      }
      lf.base_rate = (lf.n_pos + 0.5) / (lf.n_obs + 1.0);
      lf.log_geo_mean = lf.n_pos ? log_sum / lf.n_pos : global_mean;
      if (lf.n_pos < config.min_pos || lf.n_obs - lf.n_pos < config.min_zero) {
        lf.fallback = true;
        lf.resid_var = lf.n_pos > 1 ? std::max(0.0, log_sq / lf.n_pos -
                                                       lf.log_geo_mean * lf.log_geo_mean)
                                    : global_var;
        continue;
      }
      fit_logistic(X, present, config, lf);
      Eigen::MatrixXd Xp(static_cast<Eigen::Index>(pos_rows.size()), P);
      Eigen::VectorXd yp(static_cast<Eigen::Index>(pos_rows.size()));
      for (std::size_t k = 0; k < pos_rows.size(); ++k) {
        Xp.row(static_cast<Eigen::Index>(k)) = X.row(pos_rows[k]);
        yp(static_cast<Eigen::Index>(k)) =
            std::log(dense[pos_rows[k]][static_cast<std::size_t>(i) * n + j]);
      }
      fit_ols(Xp, yp, config.ols_ridge, lf);
    }
  return fit;
}

ZaPrediction predict_za(const ZaLinkFit& fit, const double* raw) {
  if (fit.fallback) return {fit.base_rate, std::exp(fit.log_geo_mean + 0.5 * fit.resid_var)};
  const auto x = za_features(raw);
  double eta = 0.0, lm = 0.0;
  for (int k = 0; k < P; ++k) {
    eta += fit.logit[k] * x[k];
    lm += fit.ols[k] * x[k];
  }
  return {link_probability({eta, 0.0}), std::exp(std::min(lm + 0.5 * fit.resid_var, kLogMeanMax))};
}

ForecastRecord forecast_za(const ZaRegFit& fit, const LinkRegressorPanel& panel, std::size_t t,
                           const Snapshot* observed) {
  const int n = fit.n_nodes;
  ForecastRecord rec;
  rec.t = t;
  rec.has_observation = observed != nullptr;
  std::vector<double> y;
  if (observed) y = observed->dense();
  rec.entries.reserve(static_cast<std::size_t>(n) * (n - 1));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto p = predict_za(fit.link(i, j), panel.row(t, i, j));
      rec.entries.push_back({i, j, p.prob, p.cond_mean,
                             observed ? y[static_cast<std::size_t>(i) * n + j] : 0.0});
    }
  return rec;
}

}  // namespace sdnet
