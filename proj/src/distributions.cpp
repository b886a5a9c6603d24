#include "sdnet/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sdnet {

namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void require_positive_sigma(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
}

// Reads X(t) for either covariate kind without a per-pair switch.
struct CovariateRow {
  const double* matrix = nullptr;
  double uniform = 0.0;
  int n = 0;

  CovariateRow(const CovariateSet& c, std::size_t t) {
    if (c.kind() == CovariateKind::scalar) uniform = c.scalar_values()[t];
    if (c.kind() == CovariateKind::per_link) {
      matrix = c.matrix(t).data();
      n = c.n_nodes();
    }
  }
  double operator()(int i, int j) const {
    return matrix ? matrix[static_cast<std::size_t>(i) * n + j] : uniform;
  }
};

}  // namespace

double log_sigmoid(double x) { return -softplus(-x); }
double log1m_sigmoid(double x) { return -softplus(x); }

double link_probability(const LinkPredictor& pred) {
  return sigmoid(std::clamp(pred.logit_p, -kLogitClamp, kLogitClamp));
}

double conditional_mean(const LinkPredictor& pred) {
  if (pred.log_mean > kLogMeanMax) throw NumericalError("predictor overflow");
  return std::exp(pred.log_mean);
}

double weight_log_density(double y, double log_mean, double sigma, WeightFamily family) {
  require_positive_sigma(sigma);
  switch (family) {
    case WeightFamily::gamma:
      // shape sigma, scale exp(log_mean) / sigma
      return -sigma * (log_mean - std::log(sigma)) + (sigma - 1.0) * std::log(y) -
             std::lgamma(sigma) - y * sigma * std::exp(-log_mean);
    case WeightFamily::poisson:
      return y * log_mean - std::exp(log_mean) - std::lgamma(y + 1.0);
    case WeightFamily::lognormal: {
      const double z = std::log(y) - (log_mean - 0.5 * sigma * sigma);
      return -std::log(y) - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi) -
             z * z / (2.0 * sigma * sigma);
    }
  }
  throw std::invalid_argument("unknown weight family");
}

double weight_score_term(double y, double log_mean, double sigma, WeightFamily family) {
  switch (family) {
    case WeightFamily::gamma:
      return y * sigma * std::exp(-log_mean) - sigma;
    case WeightFamily::poisson:
      return y - std::exp(log_mean);
    case WeightFamily::lognormal:
      return (std::log(y) - log_mean + 0.5 * sigma * sigma) / (sigma * sigma);
  }
  throw std::invalid_argument("unknown weight family");
}

double weight_curvature_term(double y, double log_mean, double sigma, WeightFamily family) {
  switch (family) {
    case WeightFamily::gamma:
      return y * sigma * std::exp(-log_mean);
    case WeightFamily::poisson:
      return std::exp(log_mean);
    case WeightFamily::lognormal:
      return 1.0 / (sigma * sigma);
  }
  throw std::invalid_argument("unknown weight family");
}

double weight_expected_curvature(double log_mean, double sigma, WeightFamily family) {
  switch (family) {
    case WeightFamily::gamma:
      return sigma;
    case WeightFamily::poisson:
      return std::exp(log_mean);
    case WeightFamily::lognormal:
      return 1.0 / (sigma * sigma);
  }
  throw std::invalid_argument("unknown weight family");
}

double za_log_density(double y, const LinkPredictor& pred, double sigma, WeightFamily family) {
  if (y < 0.0 || !std::isfinite(y)) throw std::invalid_argument("observation must be >= 0");
  if (y == 0.0) return log1m_sigmoid(pred.logit_p);
  if (family == WeightFamily::poisson && y != std::floor(y))
    throw std::invalid_argument("Poisson observation must be an integer");
  return log_sigmoid(pred.logit_p) + weight_log_density(y, pred.log_mean, sigma, family);
}

double sample_weight(std::mt19937_64& rng, double log_mean, double sigma, WeightFamily family) {
  switch (family) {
    case WeightFamily::gamma: {
      std::gamma_distribution<double> g(sigma, std::exp(log_mean) / sigma);
      double y = 0.0;
      while (!(y > 0.0)) y = g(rng);
      return y;
    }
    case WeightFamily::lognormal: {
      std::lognormal_distribution<double> g(log_mean - 0.5 * sigma * sigma, sigma);
      return g(rng);
    }
    case WeightFamily::poisson: {
      const double rate = std::exp(log_mean);
      if (rate > 1.0) {
        std::poisson_distribution<long> g(rate);
        long k = 0;
        while (k == 0) k = g(rng);
        return static_cast<double>(k);
      }
      // inversion of the zero-truncated pmf
      std::uniform_real_distribution<double> u01(0.0, 1.0);
      const double target = u01(rng) * -std::expm1(-rate);
      double pk = rate * std::exp(-rate);
      double cum = pk;
      long k = 1;
      while (cum < target && k < 1000) {
        ++k;
        pk *= rate / static_cast<double>(k);
        cum += pk;
      }
      return static_cast<double>(k);
    }
  }
  throw std::invalid_argument("unknown weight family");
}

LinkPredictor predictor(const FitnessState& f, const ModelCovariates& cov, std::size_t t,
                        const StaticParams& statics, int i, int j) {
  const int n = f.n_nodes();
  LinkPredictor p;
  p.logit_p = f.bin_out[i] + f.bin_in[j] +
              link_coefficient(statics.beta_bin, i, j, n) * cov.binary.value(t, i, j);
  p.log_mean = f.w_out[i] + f.w_in[j] +
               link_coefficient(statics.beta_w, i, j, n) * cov.weight.value(t, i, j);
  return p;
}

SnapshotTerms snapshot_terms(const Snapshot& snap, const FitnessState& f,
                             const ModelCovariates& cov, std::size_t t,
                             const StaticParams& statics) {
  const int n = f.n_nodes();
  SnapshotTerms out;
  out.score = FitnessState(n);
  out.curvature = FitnessState(n);
  const bool do_bin = statics.parts != ModelParts::weight;
  const bool do_w = statics.parts != ModelParts::binary;
  const auto& edges = snap.edges();

  if (do_bin) {
    const CovariateRow xb(cov.binary, t);
    const bool node_beta = statics.beta_bin.size() != 1;
    const double beta0 = statics.beta_bin[0];
    std::size_t e = 0;
    double ll = 0.0;
    for (int i = 0; i < n; ++i) {
      double score_out = 0.0, curv_out = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        const double beta = node_beta ? statics.beta_bin[i] + statics.beta_bin[n + j] : beta0;
        const double x = f.bin_out[i] + f.bin_in[j] + beta * xb(i, j);
        const double p = sigmoid(x);
        const bool present = e < edges.size() && edges[e].src == i && edges[e].dst == j;
        double resid;
        if (present) {
          ++e;
          ll += log_sigmoid(x);
          resid = 1.0 - p;
        } else {
          ll += log1m_sigmoid(x);
          resid = -p;
        }
        const double c = p * (1.0 - p);
        score_out += resid;
        curv_out += c;
        out.score.bin_in[j] += resid;
        out.curvature.bin_in[j] += c;
      }
      out.score.bin_out[i] = score_out;
      out.curvature.bin_out[i] = curv_out;
    }
    out.loglik_bin = ll;
  }

  if (do_w) {
    const CovariateRow xw(cov.weight, t);
    double ll = 0.0;
    for (const auto& edge : edges) {
      const int i = edge.src, j = edge.dst;
      const double lm = f.w_out[i] + f.w_in[j] +
                        link_coefficient(statics.beta_w, i, j, n) * xw(i, j);
      ll += weight_log_density(edge.weight, lm, statics.sigma, statics.family);
      const double s = weight_score_term(edge.weight, lm, statics.sigma, statics.family);
      const double c =
          statics.curvature == Curvature::expected
              ? weight_expected_curvature(lm, statics.sigma, statics.family)
              : weight_curvature_term(edge.weight, lm, statics.sigma, statics.family);
      out.score.w_out[i] += s;
      out.score.w_in[j] += s;
      out.curvature.w_out[i] += c;
      out.curvature.w_in[j] += c;
    }
    out.loglik_w = ll;
  }
  return out;
}

NodeScores binary_score(const Snapshot& snap, const FitnessState& f, const CovariateSet& cov,
                        std::size_t t, const std::vector<double>& beta_bin) {
  StaticParams p;
  p.beta_bin = beta_bin;
  p.parts = ModelParts::binary;
  const auto terms = snapshot_terms(snap, f, {cov, CovariateSet::none()}, t, p);
  return {terms.score.bin_in, terms.score.bin_out};
}

NodeScores weight_score(const Snapshot& snap, const FitnessState& f, const CovariateSet& cov,
                        std::size_t t, const std::vector<double>& beta_w, double sigma,
                        WeightFamily family) {
  require_positive_sigma(sigma);
  StaticParams p;
  p.beta_w = beta_w;
  p.sigma = sigma;
  p.family = family;
  p.parts = ModelParts::weight;
  const auto terms = snapshot_terms(snap, f, {CovariateSet::none(), cov}, t, p);
  return {terms.score.w_in, terms.score.w_out};
}

std::vector<double> scaling_diag(const SnapshotTerms& terms, double power) {
  auto curv = terms.curvature.flat();
  for (auto& c : curv) c = std::min(kScaleCap, std::pow(std::max(c, kScaleFloor), -power));
  return curv;
}

std::vector<double> scaling_diag(const Snapshot& snap, const FitnessState& f,
                                 const ModelCovariates& cov, std::size_t t,
                                 const StaticParams& statics) {
  return scaling_diag(snapshot_terms(snap, f, cov, t, statics), statics.scaling_power);
}

double snapshot_loglik(const Snapshot& snap, const FitnessState& f, const ModelCovariates& cov,
                       std::size_t t, const StaticParams& statics) {
  return snapshot_terms(snap, f, cov, t, statics).loglik();
}

Snapshot sample_snapshot(const FitnessState& f, const ModelCovariates& cov, std::size_t t,
                         const StaticParams& statics, std::mt19937_64& rng) {
  const int n = f.n_nodes();
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto pred = predictor(f, cov, t, statics, i, j);
      if (u01(rng) < link_probability(pred)) {
        if (pred.log_mean > kLogMeanMax) throw NumericalError("predictor overflow", i);
        edges.push_back({i, j, sample_weight(rng, pred.log_mean, statics.sigma, statics.family)});
      }
    }
  }
  return Snapshot(n, std::move(edges));
}

Snapshot sample_snapshot(const FitnessState& f, const ModelCovariates& cov, std::size_t t,
                         const StaticParams& statics, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_snapshot(f, cov, t, statics, rng);
}

}  // namespace sdnet
