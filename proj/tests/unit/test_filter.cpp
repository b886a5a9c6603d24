#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "sdnet/filter.hpp"

using namespace sdnet;

namespace {

StaticParams recursion(int n, double w, double b, double a, WeightFamily fam = WeightFamily::gamma) {
  auto st = StaticParams::per_group(n, {w, w, w, w}, {b, b, b, b}, {a, a, a, a});
  st.family = fam;
  st.sigma = 1.5;
  return st;
}

void check_pairwise_sums(const FitnessState& a, const FitnessState& b, double tol) {
  const int n = a.n_nodes();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      CHECK(std::abs((a.bin_in[i] + a.bin_out[j]) - (b.bin_in[i] + b.bin_out[j])) <= tol);
      CHECK(std::abs((a.w_in[i] + a.w_out[j]) - (b.w_in[i] + b.w_out[j])) <= tol);
    }
}

double group_sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

TEST_SUITE("sdfilter") {
  TEST_CASE("identify solves the shift equation") {
    FitnessState f(2);
    f.bin_in = {1.0, 1.0};
    f.bin_out = {0.0, 0.0};
    const auto g = identify(f);
    CHECK(g.bin_in == std::vector<double>{0.5, 0.5});
    CHECK(g.bin_out == std::vector<double>{0.5, 0.5});
  }

  TEST_CASE("identify is idempotent and keeps pairwise sums") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 20; ++rep) {
      auto f = test::random_state(6, rng, 2.0);
      for (auto& v : f.bin_in) v += 3.0;
      for (auto& v : f.w_out) v -= 1.5;
      const auto g = identify(f);
      CHECK(std::abs(group_sum(g.bin_in) - group_sum(g.bin_out)) < 1e-12);
      CHECK(std::abs(group_sum(g.w_in) - group_sum(g.w_out)) < 1e-12);
      check_pairwise_sums(f, g, 1e-12);
      const auto h = identify(g);
      for (int k = 0; k < 4; ++k)
        for (int i = 0; i < 6; ++i) CHECK(std::abs(h.group(k)[i] - g.group(k)[i]) <= 1e-15);
    }
  }

  TEST_CASE("log-likelihood is invariant to the in/out shift") {
    std::mt19937_64 rng(6);
    for (auto fam : {WeightFamily::gamma, WeightFamily::poisson, WeightFamily::lognormal}) {
      const auto s = test::random_snapshot(6, 0.4, fam, rng);
      const auto f = test::random_state(6, rng);
      const auto st = test::statics_for(fam, 6);
      auto g = f;
      for (auto& v : g.bin_in) v += 0.73;
      for (auto& v : g.bin_out) v -= 0.73;
      for (auto& v : g.w_in) v -= 1.21;
      for (auto& v : g.w_out) v += 1.21;
      const double l0 = snapshot_loglik(s, f, {}, 0, st);
      CHECK(std::abs(snapshot_loglik(s, g, {}, 0, st) - l0) < 1e-10);
      CHECK(std::abs(snapshot_loglik(s, identify(g), {}, 0, st) - l0) < 1e-10);
    }
  }

  TEST_CASE("log-likelihood is invariant to the covariate degeneracy") {
    std::mt19937_64 rng(7);
    const double x = 1.7;
    ModelCovariates cov{CovariateSet::scalar("x", {x}), CovariateSet::scalar("x", {x})};
    for (auto fam : {WeightFamily::gamma, WeightFamily::poisson, WeightFamily::lognormal}) {
      const auto s = test::random_snapshot(5, 0.5, fam, rng);
      const auto f = test::random_state(5, rng);
      auto st = test::statics_for(fam, 5);
      st.beta_bin = {0.4};
      st.beta_w = {-0.3};
      const double l0 = snapshot_loglik(s, f, cov, 0, st);
      // c1 + c2 + c3 x = 0 in each part
      const double c3b = 0.9, c1b = 0.25, c2b = -c3b * x - c1b;
      const double c3w = -0.6, c1w = -0.4, c2w = -c3w * x - c1w;
      auto g = f;
      for (auto& v : g.bin_in) v += c1b;
      for (auto& v : g.bin_out) v += c2b;
      for (auto& v : g.w_in) v += c1w;
      for (auto& v : g.w_out) v += c2w;
      auto st2 = st;
      st2.beta_bin = {0.4 + c3b};
      st2.beta_w = {-0.3 + c3w};
      CHECK(std::abs(snapshot_loglik(s, g, cov, 0, st2) - l0) < 1e-10);
    }
  }

  TEST_CASE("identity recursion leaves an identified state unchanged") {
    std::mt19937_64 rng(8);
    const auto f = identify(test::random_state(5, rng));
    const auto s = test::random_snapshot(5, 0.5, WeightFamily::gamma, rng);
    const auto g = sd_step(f, s, {}, 0, recursion(5, 0.0, 1.0, 0.0));
    for (int k = 0; k < 4; ++k)
      for (int i = 0; i < 5; ++i) CHECK(std::abs(g.group(k)[i] - f.group(k)[i]) < 1e-15);
  }

  TEST_CASE("affine recursion without score") {
    const FitnessState f(4, 1.0);
    const auto g = sd_step(f, Snapshot(4, {{0, 1, 2.0}}), {}, 0, recursion(4, 0.1, 0.9, 0.0));
    for (double v : g.flat()) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
  }

  TEST_CASE("sd step equals the hand-rolled update") {
    std::mt19937_64 rng(9);
    for (auto fam : {WeightFamily::gamma, WeightFamily::poisson, WeightFamily::lognormal}) {
      const int n = 5;
      const auto s = test::random_snapshot(n, 0.5, fam, rng);
      const auto f = test::random_state(n, rng);
      auto st = recursion(n, 0.0, 0.0, 0.0, fam);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (int k = 0; k < 4 * n; ++k) {
        st.w[k] = u(rng) - 0.5;
        st.b[k] = 0.5 + 0.45 * u(rng);
        st.a[k] = 0.2 * u(rng);
      }
      const auto terms = snapshot_terms(s, f, {}, 0, st);
      const auto score = terms.score.flat();
      const auto curv = terms.curvature.flat();
      const auto x = f.flat();
      std::vector<double> expect(x.size());
      for (std::size_t k = 0; k < x.size(); ++k) {
        const double scale = std::min(1.0 / std::max(curv[k], kScaleFloor), kScaleCap);
        expect[k] = st.w[k] + st.b[k] * x[k] + st.a[k] * scale * score[k];
      }
      const auto want = identify(FitnessState::from_flat(expect));
      const auto got = sd_step(f, s, {}, 0, st).flat();
      const auto w = want.flat();
      for (std::size_t k = 0; k < x.size(); ++k) CHECK(got[k] == doctest::Approx(w[k]).epsilon(1e-13));
    }
  }

  TEST_CASE("non-finite scores raise a divergent update naming the node") {
    const int n = 3;
    SnapshotTerms terms;
    terms.score = FitnessState(n);
    terms.curvature = FitnessState(n, 1.0);
    terms.score.w_out[2] = NAN;
    try {
      sd_update(FitnessState(n), terms, recursion(n, 0.0, 0.9, 0.1));
      FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
      CHECK(std::string(e.what()) == "divergent update");
      CHECK(e.node() == 2);
    }
  }

  TEST_CASE("excluded parts are carried unchanged") {
    std::mt19937_64 rng(10);
    const auto f = identify(test::random_state(4, rng));
    const auto s = test::random_snapshot(4, 0.5, WeightFamily::gamma, rng);
    auto st = recursion(4, 0.1, 0.8, 0.2);
    st.parts = ModelParts::binary;
    const auto g = sd_step(f, s, {}, 0, st);
    for (int i = 0; i < 4; ++i) {
      CHECK(std::abs(g.w_in[i] - f.w_in[i]) < 1e-15);
      CHECK(std::abs(g.w_out[i] - f.w_out[i]) < 1e-15);
    }
    CHECK(g.bin_in != f.bin_in);
  }

  TEST_CASE("filter path with the identity recursion is constant") {
    const auto net = test::random_network(4, 6, 0.5, WeightFamily::gamma, 3);
    std::mt19937_64 rng(11);
    const auto f0 = identify(test::random_state(4, rng));
    const auto path = filter_path(net, {}, recursion(4, 0.0, 1.0, 0.0), f0);
    REQUIRE(path.n_times() == 6);
    for (const auto& s : path.states)
      for (int k = 0; k < 4; ++k)
        for (int i = 0; i < 4; ++i) CHECK(std::abs(s.group(k)[i] - f0.group(k)[i]) < 1e-14);
  }

  TEST_CASE("filter path over one snapshot") {
    const auto net = test::random_network(4, 1, 0.5, WeightFamily::gamma, 4);
    const auto st = recursion(4, 0.0, 0.9, 0.1);
    const FitnessState f0(4, 0.2);
    const auto path = filter_path(net, {}, st, f0);
    REQUIRE(path.per_step_loglik.size() == 1);
    CHECK(path.per_step_loglik[0] == snapshot_loglik(net.at(0), f0, {}, 0, st));
  }

  TEST_CASE("total log-likelihood sums the steps along the path") {
    const auto net = test::random_network(5, 12, 0.4, WeightFamily::lognormal, 5);
    const auto st = recursion(5, 0.01, 0.95, 0.1, WeightFamily::lognormal);
    const auto path = filter_path(net, {}, st, FitnessState(5));
    double total = 0.0;
    for (std::size_t t = 0; t < net.n_times(); ++t) {
      const double l = snapshot_loglik(net.at(t), path.states[t], {}, t, st);
      CHECK(path.per_step_loglik[t] == doctest::Approx(l).epsilon(1e-14));
      CHECK(path.per_step_loglik[t] == doctest::Approx(path.per_step_bin[t] + path.per_step_w[t]));
      total += l;
    }
    CHECK(path.total() == doctest::Approx(total).epsilon(1e-14));
    const auto again = filter_path(net, {}, st, FitnessState(5));
    CHECK(again.total() == path.total());
    CHECK(again.next.flat() == path.next.flat());
  }

  TEST_CASE("recursion without score converges to w / (1 - b)") {
    const auto net = test::random_network(4, 80, 0.5, WeightFamily::gamma, 6);
    std::mt19937_64 rng(12);
    const auto path = filter_path(net, {}, recursion(4, 0.3, 0.7, 0.0), test::random_state(4, rng, 3.0));
    for (double v : path.next.flat()) CHECK(std::abs(v - 1.0) < 1e-10);
  }

  TEST_CASE("one-step forecast under the identity recursion") {
    std::mt19937_64 rng(13);
    const auto f = identify(test::random_state(4, rng));
    const auto s = test::random_snapshot(4, 0.5, WeightFamily::gamma, rng);
    const auto st = recursion(4, 0.0, 1.0, 0.0);
    const auto rec = forecast_one_step(f, s, {}, 0, st);
    const auto in_sample = forecast_from_state(f, {}, 0, st);
    REQUIRE(rec.entries.size() == 12);
    CHECK(rec.t == 1);
    for (std::size_t k = 0; k < rec.entries.size(); ++k) {
      CHECK(rec.entries[k].prob == doctest::Approx(in_sample.entries[k].prob).epsilon(1e-14));
      CHECK(rec.entries[k].cond_mean == doctest::Approx(in_sample.entries[k].cond_mean).epsilon(1e-14));
    }
  }

  TEST_CASE("forecast probabilities come from the stepped state") {
    std::mt19937_64 rng(14);
    const auto f = test::random_state(5, rng);
    const auto s = test::random_snapshot(5, 0.5, WeightFamily::gamma, rng);
    const Snapshot next(5, {{1, 2, 3.0}});
    const auto st = recursion(5, 0.02, 0.9, 0.15);
    const auto rec = forecast_one_step(f, s, {}, 0, st, &next);
    const auto stepped = sd_step(f, s, {}, 0, st);
    CHECK(rec.has_observation);
    for (const auto& e : rec.entries) {
      const auto pred = predictor(stepped, {}, 1, st, e.src, e.dst);
      CHECK(e.prob == link_probability(pred));
      CHECK(e.cond_mean == conditional_mean(pred));
      CHECK(e.observed == next.weight(e.src, e.dst));
    }
  }

  TEST_CASE("lag-indicator forecast rises with beta_bin for persistent links") {
    const auto net = test::random_network(5, 3, 0.4, WeightFamily::gamma, 15);
    ModelCovariates cov;
    cov.binary = lag_indicator_covariate(net);
    std::mt19937_64 rng(16);
    const auto f = test::random_state(5, rng);
    auto st0 = recursion(5, 0.0, 0.9, 0.1);
    auto st1 = st0;
    st1.beta_bin = {0.8};
    const auto r0 = forecast_from_state(f, cov, 2, st0);
    const auto r1 = forecast_from_state(f, cov, 2, st1);
    int present = 0;
    for (std::size_t k = 0; k < r0.entries.size(); ++k) {
      const auto& e = r0.entries[k];
      if (net.at(1).has_link(e.src, e.dst)) {
        ++present;
        CHECK(r1.entries[k].prob > e.prob);
      } else {
        CHECK(r1.entries[k].prob == e.prob);
      }
    }
    CHECK(present > 0);
  }

  TEST_CASE("forecast needs the covariate at the target time") {
    ModelCovariates cov;
    cov.weight = CovariateSet::scalar("x", {1.0, 2.0});
    const auto st = recursion(3, 0.0, 0.9, 0.1);
    CHECK_THROWS_AS(forecast_from_state(FitnessState(3), cov, 2, st), std::invalid_argument);
  }
}
