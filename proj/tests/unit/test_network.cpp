#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "sdnet/network.hpp"

using namespace sdnet;

TEST_SUITE("network") {
  TEST_CASE("snapshot validates and sorts edges") {
    Snapshot s(3, {{2, 0, 1.5}, {0, 1, 2.0}});
    REQUIRE(s.n_links() == 2);
    CHECK(s.edges()[0].src == 0);
    CHECK(s.weight(2, 0) == 1.5);
    CHECK(s.weight(1, 0) == 0.0);
    CHECK_THROWS_AS(Snapshot(3, {{1, 1, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(Snapshot(3, {{0, 1, 0.0}}), std::invalid_argument);
    CHECK_THROWS_AS(Snapshot(3, {{0, 1, -1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(Snapshot(3, {{0, 1, NAN}}), std::invalid_argument);
    CHECK_THROWS_AS(Snapshot(3, {{0, 3, 1.0}}), std::invalid_argument);
    CHECK_THROWS_AS(Snapshot(3, {{0, 1, 1.0}, {0, 1, 2.0}}), std::invalid_argument);
  }

  TEST_CASE("margins of a single link") {
    TemporalNetwork net(2, {Snapshot(2, {{0, 1, 2.5}})});
    const auto m = margins_of(net);
    CHECK(m.deg_out[0] == std::vector<int>{1, 0});
    CHECK(m.deg_in[0] == std::vector<int>{0, 1});
    CHECK(m.str_out[0] == std::vector<double>{2.5, 0.0});
    CHECK(m.str_in[0] == std::vector<double>{0.0, 2.5});
  }

  TEST_CASE("margins of an empty snapshot are zero") {
    TemporalNetwork net(4, {Snapshot(4, {})});
    const auto m = margins_of(net);
    for (int i = 0; i < 4; ++i) {
      CHECK(m.deg_in[0][i] == 0);
      CHECK(m.deg_out[0][i] == 0);
      CHECK(m.str_in[0][i] == 0.0);
      CHECK(m.str_out[0][i] == 0.0);
    }
  }

  TEST_CASE("margins match brute-force row and column sums") {
    const auto net = test::random_network(5, 3, 0.4, WeightFamily::gamma, 11);
    const auto m = margins_of(net);
    for (std::size_t t = 0; t < 3; ++t) {
      const auto d = net.at(t).dense();
      for (int k = 0; k < 5; ++k) {
        int din = 0, dout = 0;
        double sin = 0.0, sout = 0.0;
        for (int j = 0; j < 5; ++j) {
          const double in = d[j * 5 + k], out = d[k * 5 + j];
          din += in > 0;
          dout += out > 0;
          sin += in;
          sout += out;
        }
        CHECK(m.deg_in[t][k] == din);
        CHECK(m.deg_out[t][k] == dout);
        CHECK(m.str_in[t][k] == doctest::Approx(sin).epsilon(1e-14));
        CHECK(m.str_out[t][k] == doctest::Approx(sout).epsilon(1e-14));
        CHECK((m.str_in[t][k] == 0.0) == (m.deg_in[t][k] == 0));
      }
      const long links = static_cast<long>(net.at(t).n_links());
      CHECK(std::accumulate(m.deg_in[t].begin(), m.deg_in[t].end(), 0L) == links);
      CHECK(std::accumulate(m.deg_out[t].begin(), m.deg_out[t].end(), 0L) == links);
    }
    CHECK_NOTHROW(m.validate());
  }

  TEST_CASE("margins commute with node permutation") {
    const auto net = test::random_network(6, 2, 0.5, WeightFamily::gamma, 5);
    const std::vector<int> perm{3, 0, 5, 1, 4, 2};
    const auto m = margins_of(net);
    const auto mp = margins_of(net.permuted(perm));
    for (std::size_t t = 0; t < 2; ++t)
      for (int i = 0; i < 6; ++i) {
        CHECK(mp.deg_in[t][perm[i]] == m.deg_in[t][i]);
        CHECK(mp.deg_out[t][perm[i]] == m.deg_out[t][i]);
        CHECK(mp.str_in[t][perm[i]] == doctest::Approx(m.str_in[t][i]));
        CHECK(mp.str_out[t][perm[i]] == doctest::Approx(m.str_out[t][i]));
      }
  }

  TEST_CASE("inconsistent margins are rejected") {
    auto m = margins_of(test::random_network(4, 2, 0.5, WeightFamily::gamma, 3));
    m.deg_in[1][0] += 1;
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  }

  TEST_CASE("lag indicator of a link present only at t = 0") {
    TemporalNetwork net(3, {Snapshot(3, {{0, 1, 4.0}}), Snapshot(3, {})});
    const auto c = lag_indicator_covariate(net);
    REQUIRE(c.kind() == CovariateKind::per_link);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        CHECK(c.value(0, i, j) == 0.0);
        CHECK(c.value(1, i, j) == (i == 0 && j == 1 ? 1.0 : 0.0));
      }
  }

  TEST_CASE("lag indicator of a constant network is one on its support") {
    const Snapshot s(3, {{0, 1, 1.0}, {2, 1, 3.0}});
    const auto c = lag_indicator_covariate(TemporalNetwork(3, {s, s, s}));
    for (std::size_t t = 1; t < 3; ++t)
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(c.value(t, i, j) == (s.has_link(i, j) ? 1.0 : 0.0));
  }

  TEST_CASE("lag covariates equal the masked previous snapshot") {
    const auto net = test::random_network(5, 6, 0.3, WeightFamily::gamma, 21);
    const auto ind = lag_indicator_covariate(net);
    const auto lw = lag_logweight_covariate(net);
    for (std::size_t t = 0; t < 6; ++t)
      for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
          const double prev = t == 0 ? 0.0 : net.at(t - 1).weight(i, j);
          CHECK(ind.value(t, i, j) == (prev > 0 ? 1.0 : 0.0));
          CHECK(lw.value(t, i, j) == (prev > 0 ? std::log(prev) : 0.0));
        }
  }

  TEST_CASE("lag log-weight of e is one") {
    TemporalNetwork net(2, {Snapshot(2, {{1, 0, std::exp(1.0)}}), Snapshot(2, {})});
    const auto c = lag_logweight_covariate(net);
    CHECK(c.value(1, 1, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(c.value(1, 0, 1) == 0.0);
  }

  TEST_CASE("lag covariates need two snapshots") {
    TemporalNetwork net(2, {Snapshot(2, {})});
    CHECK_THROWS_WITH_AS(lag_indicator_covariate(net), "insufficient history", std::invalid_argument);
    CHECK_THROWS_WITH_AS(lag_logweight_covariate(net), "insufficient history", std::invalid_argument);
  }

  TEST_CASE("fitness state flat layout round trip") {
    std::mt19937_64 rng(1);
    const auto f = test::random_state(4, rng);
    const auto flat = f.flat();
    REQUIRE(flat.size() == 16);
    CHECK(flat[4] == f.bin_out[0]);
    CHECK(flat[8] == f.w_in[0]);
    const auto g = FitnessState::from_flat(flat);
    CHECK(g.flat() == flat);
  }

  TEST_CASE("covariate slice and affine map") {
    const auto c = CovariateSet::scalar("x", {1.0, 2.0, 3.0});
    const auto s = c.slice(1, 3);
    CHECK(s.n_times() == 2);
    CHECK(s.value(0, 0, 1) == 2.0);
    CHECK(c.affine(2.0, 1.0).value(2, 1, 0) == 7.0);
  }

  TEST_CASE("slice keeps the node set") {
    const auto net = test::random_network(4, 5, 0.5, WeightFamily::gamma, 2);
    const auto s = net.slice(2, 4);
    CHECK(s.n_times() == 2);
    CHECK(s.n_nodes() == 4);
    CHECK(s.at(0).edges().size() == net.at(2).edges().size());
  }
}
