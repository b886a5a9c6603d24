#include "sdnet/filter.hpp"

#include <cmath>
#include <numeric>

namespace sdnet {

double FitnessPath::total() const {
  return std::accumulate(per_step_loglik.begin(), per_step_loglik.end(), 0.0);
}
double FitnessPath::total_bin() const {
  return std::accumulate(per_step_bin.begin(), per_step_bin.end(), 0.0);
}
double FitnessPath::total_w() const {
  return std::accumulate(per_step_w.begin(), per_step_w.end(), 0.0);
}

namespace {

void identify_pair(std::vector<double>& in, std::vector<double>& out) {
  const double n = static_cast<double>(in.size());
  if (n == 0) return;
  double s_in = 0.0, s_out = 0.0;
  for (double v : in) s_in += v;
  for (double v : out) s_out += v;
  const double c = (s_in - s_out) / (2.0 * n);
  for (auto& v : in) v -= c;
  for (auto& v : out) v += c;
}

}  // namespace

FitnessState identify(FitnessState f) {
  identify_pair(f.bin_in, f.bin_out);
  identify_pair(f.w_in, f.w_out);
  return f;
}

FitnessState sd_update(const FitnessState& f, const SnapshotTerms& terms,
                       const StaticParams& statics) {
  const int n = f.n_nodes();
  if (statics.n_nodes() != n) throw std::invalid_argument("static parameters do not match N");
  const auto scale = scaling_diag(terms, statics.scaling_power);
  FitnessState next = f;
  const int g_begin = statics.parts == ModelParts::weight ? 2 : 0;
  const int g_end = statics.parts == ModelParts::binary ? 2 : 4;
  for (int g = g_begin; g < g_end; ++g) {
    const auto& cur = f.group(g);
    const auto& score = terms.score.group(g);
    auto& dst = next.group(g);
    for (int i = 0; i < n; ++i) {
      const std::size_t k = static_cast<std::size_t>(g) * n + i;
      const double v =
          statics.w[k] + statics.b[k] * cur[i] + statics.a[k] * scale[k] * score[i];
      if (!std::isfinite(v)) throw NumericalError("divergent update", i);
      dst[i] = v;
    }
  }
  return identify(std::move(next));
}

FitnessState sd_step(const FitnessState& f, const Snapshot& snap, const ModelCovariates& cov,
                     std::size_t t, const StaticParams& statics) {
  return sd_update(f, snapshot_terms(snap, f, cov, t, statics), statics);
}

FitnessPath filter_path(const TemporalNetwork& net, const ModelCovariates& cov,
                        const StaticParams& statics, const FitnessState& f0) {
  if (f0.n_nodes() != net.n_nodes()) throw std::invalid_argument("f0 does not match N");
  const std::size_t T = net.n_times();
  FitnessPath path;
  path.states.reserve(T);
  path.per_step_loglik.reserve(T);
  path.per_step_bin.reserve(T);
  path.per_step_w.reserve(T);
  FitnessState f = f0;
  for (std::size_t t = 0; t < T; ++t) {
    const auto terms = snapshot_terms(net.at(t), f, cov, t, statics);
    if (!std::isfinite(terms.loglik())) throw NumericalError("non-finite log-likelihood");
    path.per_step_bin.push_back(terms.loglik_bin);
    path.per_step_w.push_back(terms.loglik_w);
    path.per_step_loglik.push_back(terms.loglik());
    FitnessState next = sd_update(f, terms, statics);
    path.states.push_back(std::move(f));
    f = std::move(next);
  }
  path.next = std::move(f);
  return path;
}

ForecastRecord forecast_from_state(const FitnessState& f, const ModelCovariates& cov,
                                   std::size_t t, const StaticParams& statics,
                                   const Snapshot* observed) {
  const int n = f.n_nodes();
  for (const auto* c : {&cov.binary, &cov.weight})
    if (!c->is_none() && t >= c->n_times())
      throw std::invalid_argument("covariate '" + c->name() + "' not available at forecast time");
  ForecastRecord rec;
  rec.t = t;
  rec.has_observation = observed != nullptr;
  rec.entries.reserve(static_cast<std::size_t>(n) * (n - 1));
  std::vector<double> dense;
  if (observed) dense = observed->dense();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto pred = predictor(f, cov, t, statics, i, j);
      ForecastEntry e;
      e.src = i;
      e.dst = j;
      e.prob = link_probability(pred);
      e.cond_mean = conditional_mean(pred);
      if (observed) e.observed = dense[static_cast<std::size_t>(i) * n + j];
      rec.entries.push_back(e);
    }
  }
  return rec;
}

ForecastRecord forecast_one_step(const FitnessState& f_T, const Snapshot& snap_T,
                                 const ModelCovariates& cov, std::size_t t_T,
                                 const StaticParams& statics, const Snapshot* observed) {
  const auto next = sd_step(f_T, snap_T, cov, t_T, statics);
  return forecast_from_state(next, cov, t_T + 1, statics, observed);
}

}  // namespace sdnet
