#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "sdnet/baselines.hpp"

using namespace sdnet;

TEST_SUITE("baselines") {
  TEST_CASE("regressors of a single lagged link") {
    const TemporalNetwork net(3, {Snapshot(3, {{0, 1, 2.0}}), Snapshot(3, {})});
    const auto panel = build_regressors(net);
    const double* r = panel.row(1, 0, 1);
    CHECK(r[0] == 2.0);
    for (int k = 1; k < kNumRegressors; ++k) CHECK(r[k] == 0.0);
  }

  TEST_CASE("regressors with a second lagged link") {
    const TemporalNetwork net(3, {Snapshot(3, {{0, 1, 2.0}, {2, 0, 5.0}}), Snapshot(3, {})});
    const auto panel = build_regressors(net);
    const double* r01 = panel.row(1, 0, 1);
    CHECK(r01[0] == 2.0);
    CHECK(r01[1] == 0.0);  // lent by 0 to all but 1
    CHECK(r01[2] == 0.0);  // borrowed by 1 from all but 0
    CHECK(r01[3] == 0.0);  // lent by 1 to all but 0
    CHECK(r01[4] == 5.0);  // borrowed by 0 from all but 1
    CHECK(r01[5] == 0.0);
    // with three nodes every link touches 2 or 0, so nothing flows among the others
    const double* r20 = panel.row(1, 2, 0);
    CHECK(r20[0] == 5.0);
    CHECK(r20[3] == 2.0);  // lent by 0 to all but 2
    CHECK(r20[5] == 0.0);
  }

  TEST_CASE("total flow among the other nodes") {
    const TemporalNetwork net(4, {Snapshot(4, {{0, 1, 2.0}, {2, 3, 7.0}, {3, 2, 1.0}}), Snapshot(4, {})});
    const auto panel = build_regressors(net);
    CHECK(panel.row(1, 0, 1)[5] == 8.0);
    CHECK(panel.row(1, 2, 3)[5] == 2.0);
    CHECK(panel.row(1, 0, 2)[5] == 0.0);
  }

  TEST_CASE("empty previous snapshot gives zero regressors") {
    const TemporalNetwork net(3, {Snapshot(3, {}), Snapshot(3, {{1, 2, 1.0}})});
    const auto panel = build_regressors(net);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        if (i == j) continue;
        for (int k = 0; k < kNumRegressors; ++k) CHECK(panel.row(1, i, j)[k] == 0.0);
      }
    CHECK_THROWS_AS(panel.row(0, 0, 1), std::out_of_range);
    CHECK_THROWS_WITH_AS(build_regressors(TemporalNetwork(3, {Snapshot(3, {})})),
                         "insufficient history", std::invalid_argument);
  }

  TEST_CASE("regressors satisfy the accounting identities") {
    const auto net = test::random_network(6, 4, 0.5, WeightFamily::gamma, 3);
    const auto panel = build_regressors(net);
    const auto m = margins_of(net);
    for (std::size_t t = 1; t < 4; ++t) {
      double total = 0.0;
      for (double v : m.str_out[t - 1]) total += v;
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
          if (i == j) continue;
          const double* r = panel.row(t, i, j);
          const double yji = net.at(t - 1).weight(j, i);
          CHECK(r[0] + r[1] == doctest::Approx(m.str_out[t - 1][i]));
          CHECK(r[0] + r[2] == doctest::Approx(m.str_in[t - 1][j]));
          CHECK(yji + r[3] == doctest::Approx(m.str_out[t - 1][j]));
          CHECK(yji + r[4] == doctest::Approx(m.str_in[t - 1][i]));
          // own, reverse, the four exclusion aggregates and the rest add up to the total
          CHECK(r[0] + yji + r[1] + r[2] + r[3] + r[4] + r[5] == doctest::Approx(total));
        }
    }
  }

  TEST_CASE("always-present link forecasts high probability") {
    std::vector<Snapshot> snaps;
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    for (int t = 0; t < 30; ++t) snaps.emplace_back(3, std::vector<Edge>{{0, 1, u(rng)}});
    const TemporalNetwork net(3, snaps);
    const auto panel = build_regressors(net);
    const auto fit = fit_za_regression(net, panel, 1, 30);
    CHECK(fit.link(0, 1).fallback);
    CHECK(predict_za(fit.link(0, 1), panel.row(29, 0, 1)).prob >= 0.95);
    CHECK(predict_za(fit.link(1, 0), panel.row(29, 1, 0)).prob < 0.05);
  }

  TEST_CASE("separated logistic regression is bounded and flagged") {
    std::vector<Snapshot> snaps;
    for (int t = 0; t < 20; ++t)
      snaps.emplace_back(2, t % 2 ? std::vector<Edge>{{0, 1, 1.5}} : std::vector<Edge>{});
    const TemporalNetwork net(2, snaps);
    const auto panel = build_regressors(net);
    const auto fit = fit_za_regression(net, panel, 1, 20);
    const auto& lf = fit.link(0, 1);
    CHECK_FALSE(lf.fallback);
    CHECK(lf.capped);
    for (double c : lf.logit) CHECK(std::abs(c) <= ZaRegConfig{}.coef_cap + 1e-12);
    CHECK(predict_za(lf, panel.row(3, 0, 1)).prob > 0.95);
    CHECK(predict_za(lf, panel.row(2, 0, 1)).prob < 0.05);
  }

  TEST_CASE("OLS slope on the lagged log weight") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> eps(0.0, 0.3);
    const int T = 600;
    std::vector<Snapshot> snaps;
    double prev = 0.0;
    for (int t = 0; t < T; ++t) {
      std::vector<Edge> edges;
      double w = 0.0;
      if (u(rng) < 0.7) {
        w = std::exp(0.3 + 0.5 * std::log1p(prev) + eps(rng));
        edges.push_back({0, 1, w});
      }
      prev = w;
      snaps.emplace_back(2, edges);
    }
    const TemporalNetwork net(2, snaps);
    const auto panel = build_regressors(net);
    ZaRegConfig cfg;
    cfg.ols_ridge = 0.0;
    const auto fit = fit_za_regression(net, panel, 1, T, cfg);
    const auto& lf = fit.link(0, 1);
    // simple regression of log y on (1, log1p lag) over the positive rows
    double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
    for (int t = 1; t < T; ++t) {
      const double y = net.at(t).weight(0, 1);
      if (y <= 0) continue;
      const double x = std::log1p(net.at(t - 1).weight(0, 1)), ly = std::log(y);
      sx += x, sy += ly, sxx += x * x, sxy += x * ly, n += 1;
    }
    const double slope = (sxy - sx * sy / n) / (sxx - sx * sx / n);
    const double icpt = sy / n - slope * sx / n;
    double ssr = 0;
    for (int t = 1; t < T; ++t) {
      const double y = net.at(t).weight(0, 1);
      if (y <= 0) continue;
      const double r = std::log(y) - icpt - slope * std::log1p(net.at(t - 1).weight(0, 1));
      ssr += r * r;
    }
    const double se = std::sqrt(ssr / (n - 2) / (sxx - sx * sx / n));
    CHECK(lf.ols[1] == doctest::Approx(slope).epsilon(1e-6));
    CHECK(lf.ols[0] == doctest::Approx(icpt).epsilon(1e-6));
    CHECK(std::abs(lf.ols[1] - 0.5) < 3 * se);
  }

  TEST_CASE("predictions reproduce the fitted linear predictors") {
    const auto net = test::random_network(5, 40, 0.5, WeightFamily::gamma, 4);
    const auto panel = build_regressors(net);
    const auto fit = fit_za_regression(net, panel, 1, 40);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        if (i == j) continue;
        const auto& lf = fit.link(i, j);
        REQUIRE_FALSE(lf.fallback);
        for (std::size_t t : {1, 17, 39}) {
          const auto x = za_features(panel.row(t, i, j));
          double eta = 0, lm = 0;
          for (int k = 0; k <= kNumRegressors; ++k) {
            eta += lf.logit[k] * x[k];
            lm += lf.ols[k] * x[k];
          }
          const auto p = predict_za(lf, panel.row(t, i, j));
          CHECK(p.prob == doctest::Approx(link_probability({eta, 0.0})).epsilon(1e-14));
          CHECK(std::log(p.cond_mean) == doctest::Approx(lm + 0.5 * lf.resid_var).epsilon(1e-12));
        }
      }
  }

  TEST_CASE("forecast records cover every pair") {
    const auto net = test::random_network(4, 12, 0.5, WeightFamily::gamma, 5);
    const auto panel = build_regressors(net);
    const auto fit = fit_za_regression(net, panel, 1, 11);
    const auto rec = forecast_za(fit, panel, 11, &net.at(11));
    CHECK(rec.entries.size() == 12);
    CHECK(rec.has_observation);
    for (const auto& e : rec.entries) {
      CHECK(e.observed == net.at(11).weight(e.src, e.dst));
      CHECK(e.prob > 0.0);
      CHECK(e.prob <= 1.0);
      CHECK(e.cond_mean > 0.0);
    }
    CHECK_THROWS_AS(fit_za_regression(net, panel, 0, 5), std::invalid_argument);
  }
}
