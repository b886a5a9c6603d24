#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "sdnet/eval.hpp"
#include "sdnet/rolling.hpp"

using namespace sdnet;

namespace {

RollingConfig quick_config() {
  RollingConfig cfg;
  cfg.window = 15;
  cfg.models = {ForecastModel::sd, ForecastModel::ss_ar1, ForecastModel::constant,
                ForecastModel::nofitness, ForecastModel::zareg};
  cfg.refit_every = 2;
  cfg.sd.std_errors = false;
  cfg.sd.optim.max_iters = 30;
  return cfg;
}

}  // namespace

TEST_SUITE("rolling") {
  TEST_CASE("history view refuses look-ahead") {
    const auto net = test::random_network(4, 10, 0.5, WeightFamily::gamma, 1);
    const HistoryView hv(net, 6);
    CHECK_NOTHROW(hv.at(6));
    CHECK_THROWS_AS(hv.at(7), std::out_of_range);
    CHECK(hv.window(2, 7).n_times() == 5);
    CHECK_THROWS_AS(hv.window(2, 8), std::out_of_range);
    CHECK_THROWS_AS(HistoryView(net, 10), std::out_of_range);
  }

  TEST_CASE("forecast models round-trip through their names") {
    for (auto m : {ForecastModel::sd, ForecastModel::ss_ar1, ForecastModel::constant,
                   ForecastModel::nofitness, ForecastModel::zareg})
      CHECK(parse_forecast_model(to_string(m)) == m);
    CHECK_THROWS_AS(parse_forecast_model("oracle"), std::invalid_argument);
  }

  TEST_CASE("forecasts do not depend on later snapshots") {
    const auto net = test::random_network(5, 24, 0.5, WeightFamily::gamma, 2);
    auto cfg = quick_config();
    cfg.last_origin = 18;
    const auto a = rolling_forecast(net, {}, cfg);
    // replace everything after the last forecast origin
    auto snaps = net.snapshots();
    const auto other = test::random_network(5, 24, 0.9, WeightFamily::gamma, 99);
    for (std::size_t t = 19; t < 24; ++t) snaps[t] = other.at(t);
    const TemporalNetwork altered(5, snaps);
    const auto b = rolling_forecast(altered, {}, cfg);
    for (const auto& [m, recs] : a.forecasts) {
      const auto& other_recs = b.forecasts.at(m);
      REQUIRE(recs.size() == 5);
      REQUIRE(other_recs.size() == recs.size());
      for (std::size_t k = 0; k < recs.size(); ++k) {
        CHECK(recs[k].t == cfg.window + k);
        REQUIRE(recs[k].entries.size() == other_recs[k].entries.size());
        for (std::size_t e = 0; e < recs[k].entries.size(); ++e) {
          CHECK_MESSAGE(recs[k].entries[e].prob == other_recs[k].entries[e].prob, to_string(m));
          CHECK_MESSAGE(recs[k].entries[e].cond_mean == other_recs[k].entries[e].cond_mean, to_string(m));
        }
      }
    }
  }

  TEST_CASE("observations are attached to every record") {
    const auto net = test::random_network(4, 18, 0.5, WeightFamily::gamma, 3);
    auto cfg = quick_config();
    cfg.models = {ForecastModel::nofitness};
    const auto res = rolling_forecast(net, {}, cfg);
    const auto& recs = res.forecasts.at(ForecastModel::nofitness);
    CHECK(recs.size() == 18 - cfg.window);
    for (const auto& r : recs) {
      CHECK(r.has_observation);
      for (const auto& e : r.entries) CHECK(e.observed == net.at(r.t).weight(e.src, e.dst));
    }
  }

  TEST_CASE("rolling forecasts do not depend on the thread count") {
    const auto net = test::random_network(5, 20, 0.5, WeightFamily::gamma, 4);
    auto cfg = quick_config();
    const auto a = rolling_forecast(net, {}, cfg);
    cfg.threads = 3;
    const auto b = rolling_forecast(net, {}, cfg);
    for (const auto& [m, recs] : a.forecasts)
      for (std::size_t k = 0; k < recs.size(); ++k)
        for (std::size_t e = 0; e < recs[k].entries.size(); ++e) {
          CHECK(recs[k].entries[e].prob == b.forecasts.at(m)[k].entries[e].prob);
          CHECK(recs[k].entries[e].cond_mean == b.forecasts.at(m)[k].entries[e].cond_mean);
        }
  }

  TEST_CASE("invalid rolling setups") {
    const auto net = test::random_network(4, 10, 0.5, WeightFamily::gamma, 5);
    RollingConfig cfg;
    cfg.window = 10;
    CHECK_THROWS_AS(rolling_forecast(net, {}, cfg), std::invalid_argument);
    cfg.window = 1;
    CHECK_THROWS_AS(rolling_forecast(net, {}, cfg), std::invalid_argument);
    cfg.window = 5;
    cfg.refit_every = 0;
    CHECK_THROWS_AS(rolling_forecast(net, {}, cfg), std::invalid_argument);
  }

  TEST_CASE("paired losses skip records without positive links") {
    auto rec = [](std::size_t t, double mu, double y) {
      ForecastRecord r;
      r.t = t;
      r.has_observation = true;
      r.entries = {{0, 1, 0.5, mu, y}};
      return r;
    };
    const std::vector<ForecastRecord> a{rec(3, std::exp(1.0), 1.0), rec(4, 1.0, 0.0), rec(5, 2.0, 2.0)};
    const std::vector<ForecastRecord> b{rec(3, 1.0, 1.0), rec(4, 1.0, 0.0), rec(5, std::exp(2.0), 2.0)};
    const auto [la, lb] = paired_losses(a, b);
    REQUIRE(la.size() == 2);
    CHECK(la[0] == doctest::Approx(1.0));
    CHECK(la[1] == 0.0);
    CHECK(lb[0] == 0.0);
    CHECK(lb[1] == doctest::Approx(std::pow(2.0 - std::log(2.0), 2)));
    CHECK_THROWS_AS(paired_losses(a, {b[0], b[1]}), std::invalid_argument);
    CHECK_THROWS_AS(paired_losses({a[0]}, {b[1]}), std::invalid_argument);
  }

  TEST_CASE("support bins group links by training frequency") {
    // link 0->1 present in both window snapshots, 1->0 in one of them
    const TemporalNetwork net(2, {Snapshot(2, {{0, 1, 1.0}, {1, 0, 1.0}}), Snapshot(2, {{0, 1, 1.0}}),
                                  Snapshot(2, {{0, 1, 1.0}, {1, 0, 1.0}})});
    ForecastRecord r;
    r.t = 2;
    r.has_observation = true;
    r.entries = {{0, 1, 0.9, std::exp(1.0), 1.0}, {1, 0, 0.5, std::exp(3.0), 1.0}};
    const auto bins = support_bins({r}, net, 2, 2);
    REQUIRE(bins.size() == 2);
    CHECK(bins[0].support_lo == 0.5);
    CHECK(bins[0].mse_log == doctest::Approx(9.0));
    CHECK(bins[0].count == 1);
    CHECK(bins[1].support_hi == 1.0);
    CHECK(bins[1].mse_log == doctest::Approx(1.0));
    // more bins than items leaves no empty bin
    CHECK(support_bins({r}, net, 2, 10).size() == 2);
    CHECK_THROWS_AS(support_bins({r}, net, 3, 2), std::invalid_argument);
  }

  TEST_CASE("support bins pool to the overall log error") {
    const auto net = test::random_network(5, 20, 0.5, WeightFamily::gamma, 6);
    auto cfg = quick_config();
    cfg.models = {ForecastModel::constant};
    const auto recs = rolling_forecast(net, {}, cfg).forecasts.at(ForecastModel::constant);
    const auto bins = support_bins(recs, net, cfg.window, 4);
    double total = 0;
    long count = 0;
    for (const auto& b : bins) total += b.mse_log * b.count, count += b.count;
    CHECK(total / count == doctest::Approx(mse_log(recs)).epsilon(1e-12));
    for (std::size_t k = 1; k < bins.size(); ++k) CHECK(bins[k].support_lo >= bins[k - 1].support_hi);
  }
}
