#include "sdnet/rolling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sdnet/eval.hpp"
#include "sdnet/parallel.hpp"

namespace sdnet {

std::string to_string(ForecastModel m) {
  switch (m) {
    case ForecastModel::sd: return "sd";
    case ForecastModel::ss_ar1: return "ss-ar1";
    case ForecastModel::constant: return "constant";
    case ForecastModel::nofitness: return "nofitness";
    case ForecastModel::zareg: return "zareg";
  }
  return "unknown";
}

ForecastModel parse_forecast_model(const std::string& s) {
  for (auto m : {ForecastModel::sd, ForecastModel::ss_ar1, ForecastModel::constant,
                 ForecastModel::nofitness, ForecastModel::zareg})
    if (to_string(m) == s) return m;
  throw std::invalid_argument("unknown forecast model '" + s + "'");
}

HistoryView::HistoryView(const TemporalNetwork& net, std::size_t limit)
    : net_(&net), limit_(limit) {
  if (limit >= net.n_times()) throw std::out_of_range("history limit beyond the network");
}

const Snapshot& HistoryView::at(std::size_t t) const {
  if (t > limit_)
    throw std::out_of_range("look-ahead access to snapshot " + std::to_string(t) +
                            " from origin " + std::to_string(limit_));
  return net_->at(t);
}

TemporalNetwork HistoryView::window(std::size_t begin, std::size_t end) const {
  if (end > limit_ + 1)
    throw std::out_of_range("look-ahead access to snapshot " + std::to_string(end - 1) +
                            " from origin " + std::to_string(limit_));
  return net_->slice(begin, end);
}

namespace {

struct Origins {
  std::size_t first = 0;
  std::size_t last = 0;
  std::size_t count() const { return last - first + 1; }
};

// Refit blocks: origins [first + b k, first + (b + 1) k).
template <typename Fn>
void for_blocks(const Origins& o, std::size_t k, int threads, Fn&& fn) {
  const std::size_t blocks = (o.count() + k - 1) / k;
  parallel_for(blocks, threads, [&](std::size_t b) {
    const std::size_t r = o.first + b * k;
    fn(r, std::min(o.last + 1, r + k));
  });
}

StaticParams static_forecast_params(const FitResult& fit, WeightFamily family) {
  StaticParams st = fit.statics;
  st.family = family;
  st.parts = ModelParts::both;
  return st;
}

void sd_forecasts(const TemporalNetwork& net, const ModelCovariates& cov,
                  const RollingConfig& cfg, const Origins& o, std::vector<ForecastRecord>& out,
                  std::vector<std::string>& warnings) {
  std::vector<std::vector<std::string>> notes(o.count());
  for_blocks(o, cfg.refit_every, cfg.threads, [&](std::size_t r, std::size_t end) {
    const HistoryView hv(net, r);
    const std::size_t s0 = r + 1 - cfg.window;
    SdFitConfig sc = cfg.sd;
    sc.family = cfg.family;
    sc.parts = cfg.sd_parts;
    const auto fit = fit_sd(hv.window(s0, r + 1), cov.slice(s0, r + 1), sc);
    for (const auto& w : fit.warnings)
      notes[r - o.first].push_back("sd origin " + std::to_string(r) + ": " + w);
    StaticParams st = fit.statics;
    FitnessState state = fit.path.next;
    for (std::size_t t = r; t < end; ++t) {
      if (t > r) {
        const HistoryView now(net, t);
        state = sd_step(state, now.at(t), cov, t, st);
      }
      out[t - o.first] = forecast_from_state(state, cov, t + 1, st);
    }
  });
  for (auto& n : notes) warnings.insert(warnings.end(), n.begin(), n.end());
}

void static_forecasts(const TemporalNetwork& net, const ModelCovariates& cov,
                      const RollingConfig& cfg, const Origins& o, bool fitness,
                      std::vector<ForecastRecord>& out) {
  for_blocks(o, cfg.refit_every, cfg.threads, [&](std::size_t r, std::size_t end) {
    const HistoryView hv(net, r);
    const std::size_t s0 = r + 1 - cfg.window;
    StaticFitConfig sc;
    sc.family = cfg.family;
    const auto fit = fitness ? fit_constant(hv.window(s0, r + 1), cov.slice(s0, r + 1), sc)
                             : fit_nofitness(hv.window(s0, r + 1), cov.slice(s0, r + 1), sc);
    const auto st = static_forecast_params(fit, cfg.family);
    for (std::size_t t = r; t < end; ++t)
      out[t - o.first] = forecast_from_state(fit.fitness, cov, t + 1, st);
  });
}

void ss_forecasts(const TemporalNetwork& net, const RollingConfig& cfg, const Origins& o,
                  std::vector<ForecastRecord>& out) {
  const int n = net.n_nodes();
  const std::size_t first_needed = o.first + 1 - cfg.window;
  const auto full = static_cast<std::size_t>(n) * (n - 1);
  const std::size_t span = o.last + 1 - first_needed;
  std::vector<FitnessState> fits(span);
  std::vector<char> good(span, 0);
  StaticFitConfig sc;
  sc.family = cfg.family;
  sc.estimate_beta = false;
  parallel_for(span, cfg.threads, [&](std::size_t k) {
    const std::size_t t = first_needed + k;
    const HistoryView hv(net, t);
    const auto& s = hv.at(t);
    if (s.n_links() == 0 || s.n_links() == full) return;
    fits[k] = fit_snapshot(s, {}, 0, sc).fitness;
    good[k] = 1;
  });
  StaticParams st;
  st.family = cfg.family;
  parallel_for(o.count(), cfg.threads, [&](std::size_t q) {
    const std::size_t t = o.first + q;
    const std::size_t s0 = t + 1 - cfg.window;
    // window path with carried states inside the window only
    std::vector<const FitnessState*> path;
    const FitnessState* last = nullptr;
    std::size_t leading = 0;
    for (std::size_t u = s0; u <= t; ++u) {
      const std::size_t k = u - first_needed;
      if (good[k]) last = &fits[k];
      if (last)
        path.push_back(last);
      else
        ++leading;
    }
    FitnessState next(n);
    if (!path.empty()) {
      path.insert(path.begin(), leading, path.front());
      for (int g = 0; g < 4; ++g)
        for (int i = 0; i < n; ++i) {
          std::vector<double> series(path.size());
          for (std::size_t u = 0; u < path.size(); ++u) series[u] = path[u]->group(g)[i];
          double value = series.back();
          try {
            value = forecast_ar1(fit_ar1(series), series.back());
          } catch (const std::invalid_argument&) {
          }
          next.group(g)[i] = std::clamp(value, -kFitnessCap, kFitnessCap);
        }
    }
    out[q] = forecast_from_state(identify(next), {}, t + 1, st);
  });
}

void za_forecasts(const TemporalNetwork& net, const RollingConfig& cfg, const Origins& o,
                  std::vector<ForecastRecord>& out) {
  const int n = net.n_nodes();
  for_blocks(o, cfg.refit_every, cfg.threads, [&](std::size_t r, std::size_t end) {
    const HistoryView hv(net, end - 1);
    // one empty trailing snapshot so that row end exists; its regressors
    // only use snapshot end - 1
    auto snaps = hv.window(0, end).snapshots();
    snaps.emplace_back(n, std::vector<Edge>{});
    const TemporalNetwork hist(n, std::move(snaps));
    const auto panel = build_regressors(hist);
    const std::size_t s0 = std::max<std::size_t>(1, r + 1 - cfg.window);
    const auto fit = fit_za_regression(hist, panel, s0, r + 1);
    for (std::size_t t = r; t < end; ++t) out[t - o.first] = forecast_za(fit, panel, t + 1);
  });
}

void attach_observations(const TemporalNetwork& net, std::vector<ForecastRecord>& records) {
  for (auto& rec : records) {
    const auto y = net.at(rec.t).dense();
    const int n = net.n_nodes();
    for (auto& e : rec.entries) e.observed = y[static_cast<std::size_t>(e.src) * n + e.dst];
    rec.has_observation = true;
  }
}

}  // namespace

RollingResult rolling_forecast(const TemporalNetwork& net, const ModelCovariates& cov,
                               const RollingConfig& config) {
  const std::size_t T = net.n_times();
  if (config.window < 2) throw std::invalid_argument("window must be >= 2");
  if (config.refit_every < 1) throw std::invalid_argument("refit_every must be >= 1");
  if (T < config.window + 1)
    throw std::invalid_argument("network has " + std::to_string(T) +
                                " snapshots, fewer than window + 1");
  for (const auto* c : {&cov.binary, &cov.weight})
    if (!c->is_none() && c->n_times() != T)
      throw std::invalid_argument("covariate '" + c->name() + "' is not aligned with the network");
  Origins o;
  o.first = config.window - 1;
  o.last = config.last_origin ? std::min(config.last_origin, T - 2) : T - 2;
  if (o.last < o.first) throw std::invalid_argument("last_origin precedes the first window");

  RollingResult result;
  for (auto m : config.models) {
    std::vector<ForecastRecord> recs(o.count());
    switch (m) {
      case ForecastModel::sd:
        sd_forecasts(net, cov, config, o, recs, result.warnings);
        break;
      case ForecastModel::ss_ar1:
        ss_forecasts(net, config, o, recs);
        break;
      case ForecastModel::constant:
        static_forecasts(net, cov, config, o, true, recs);
        break;
      case ForecastModel::nofitness:
        static_forecasts(net, cov, config, o, false, recs);
        break;
      case ForecastModel::zareg:
        za_forecasts(net, config, o, recs);
        break;
    }
    attach_observations(net, recs);
    result.forecasts[m] = std::move(recs);
  }
  return result;
}

std::pair<std::vector<double>, std::vector<double>> paired_losses(
    const std::vector<ForecastRecord>& a, const std::vector<ForecastRecord>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("forecast sequences differ in length");
  std::pair<std::vector<double>, std::vector<double>> out;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].t != b[k].t) throw std::invalid_argument("forecast sequences are not aligned");
    const double la = record_mse_log(a[k]);
    const double lb = record_mse_log(b[k]);
    if (std::isnan(la) || std::isnan(lb)) continue;
    out.first.push_back(la);
    out.second.push_back(lb);
  }
  return out;
}

std::vector<SupportBin> support_bins(const std::vector<ForecastRecord>& records,
                                     const TemporalNetwork& net, std::size_t window,
                                     int n_bins) {
  if (n_bins < 1) throw std::invalid_argument("n_bins must be >= 1");
  const int n = net.n_nodes();
  struct Item {
    double support;
    double sq;
  };
  std::vector<Item> items;
  for (const auto& rec : records) {
    if (rec.t < window) throw std::invalid_argument("record precedes a full training window");
    std::vector<int> count(static_cast<std::size_t>(n) * n, 0);
    for (std::size_t u = rec.t - window; u < rec.t; ++u)
      for (const auto& e : net.at(u).edges()) ++count[static_cast<std::size_t>(e.src) * n + e.dst];
    for (const auto& e : rec.entries)
      if (e.observed > 0.0) {
        const double d = std::log(e.cond_mean) - std::log(e.observed);
        items.push_back({count[static_cast<std::size_t>(e.src) * n + e.dst] /
                             static_cast<double>(window),
                         d * d});
      }
  }
  if (items.empty()) throw std::invalid_argument("no positive observations");
  std::stable_sort(items.begin(), items.end(),
                   [](const Item& x, const Item& y) { return x.support < y.support; });
  std::vector<SupportBin> bins;
  const std::size_t m = items.size();
  for (int b = 0; b < n_bins; ++b) {
    const std::size_t lo = m * b / n_bins, hi = m * (b + 1) / n_bins;
    if (lo == hi) continue;
    SupportBin bin;
    bin.support_lo = items[lo].support;
    bin.support_hi = items[hi - 1].support;
    for (std::size_t k = lo; k < hi; ++k) bin.mse_log += items[k].sq;
    bin.count = static_cast<long>(hi - lo);
    bin.mse_log /= static_cast<double>(bin.count);
    bins.push_back(bin);
  }
  return bins;
}

}  // namespace sdnet
