#include <cmath>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "sdnet/io.hpp"

using namespace sdnet;

namespace {

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("fnv1a reference vectors") {
    CHECK(hex64(fnv1a("")) == "cbf29ce484222325");
    CHECK(hex64(fnv1a("a")) == "af63dc4c8601ec8c");
    CHECK(hex64(fnv1a("foobar")) == "85944171f73967e8");
  }

  TEST_CASE("stamp line") {
    FileStamp stamp;
    stamp.config_hash = "0123456789abcdef";
    stamp.seed = 42;
    const auto line = stamp.line();
    CHECK(line.rfind("# sdnet ", 0) == 0);
    CHECK(line.find(" config=0123456789abcdef seed=42") != std::string::npos);
  }

  TEST_CASE("edge list round trip keeps 15 significant digits") {
    const auto net = test::random_network(6, 5, 0.5, WeightFamily::lognormal, 1);
    auto snaps = net.snapshots();
    snaps[2] = Snapshot(6, {{0, 5, 1.23456789012345e-7}, {5, 0, 9.87654321098765e8}});
    const TemporalNetwork src(6, snaps);
    std::ostringstream out;
    write_edge_list(out, src, {});
    CHECK(first_line(out.str()) == FileStamp{}.line());
    std::istringstream in(out.str());
    const auto back = read_edge_list(in, 5, 6);
    REQUIRE(back.n_times() == 5);
    REQUIRE(back.n_nodes() == 6);
    for (std::size_t t = 0; t < 5; ++t) {
      REQUIRE(back.at(t).n_links() == src.at(t).n_links());
      for (const auto& e : src.at(t).edges())
        CHECK(std::abs(back.at(t).weight(e.src, e.dst) / e.weight - 1.0) < 1e-14);
    }
  }

  TEST_CASE("string ids map to indices by first appearance") {
    std::istringstream in("t,src,dst,weight\n0,bank_b,bank_a,2.5\n1,bank_a,bank_c,1\n");
    const auto net = read_edge_list(in);
    CHECK(net.n_nodes() == 3);
    CHECK(net.n_times() == 2);
    CHECK(node_label(net, 0) == "bank_b");
    CHECK(node_label(net, 2) == "bank_c");
    CHECK(net.at(0).weight(0, 1) == 2.5);
    CHECK(net.at(1).weight(1, 2) == 1.0);
  }

  TEST_CASE("numeric ids are node indices") {
    std::istringstream in("t,src,dst,weight\n# comment\n0,3,1,2\n2,0,3,4\n");
    const auto net = read_edge_list(in, 4, 6);
    CHECK(net.n_nodes() == 6);
    CHECK(net.n_times() == 4);
    CHECK(net.at(0).weight(3, 1) == 2.0);
    CHECK(net.at(1).empty());
    CHECK(net.at(2).weight(0, 3) == 4.0);
    CHECK(net.at(3).empty());
    CHECK(node_label(net, 5) == "5");
  }

  TEST_CASE("malformed edge lists are data errors") {
    auto bad = [](const std::string& text) {
      std::istringstream in(text);
      return read_edge_list(in);
    };
    CHECK_THROWS_AS(bad("t,src,dst,weight\n0,a,a,1\n"), DataError);
    CHECK_THROWS_WITH_AS(bad("t,src,dst,weight\n0,a,a,1\n"), doctest::Contains("self-loop"), DataError);
    CHECK_THROWS_AS(bad("time,from,to,w\n0,a,b,1\n"), DataError);
    CHECK_THROWS_AS(bad(""), DataError);
    CHECK_THROWS_AS(bad("t,src,dst,weight\n0,a,b,-1\n"), DataError);
    CHECK_THROWS_AS(bad("t,src,dst,weight\n0,a,b,0\n"), DataError);
    CHECK_THROWS_AS(bad("t,src,dst,weight\nx,a,b,1\n"), DataError);
    CHECK_THROWS_AS(bad("t,src,dst,weight\n0,a,b\n"), DataError);
    CHECK_THROWS_WITH_AS(bad("t,src,dst,weight\n0,a,b,1\n0,b,c,nan\n"), doctest::Contains("line 3"), DataError);
    CHECK_THROWS_AS(read_edge_list_file("/nonexistent/edges.csv"), DataError);
  }

  TEST_CASE("covariate round trips") {
    const auto net = test::random_network(4, 3, 0.5, WeightFamily::gamma, 2);
    const auto scalar = CovariateSet::scalar("rate", {0.5, -1.25, 3.0});
    std::ostringstream out;
    write_covariate(out, scalar, net, {});
    std::istringstream in(out.str());
    const auto back = read_covariate(in, "rate", net);
    REQUIRE(back.kind() == CovariateKind::scalar);
    for (std::size_t t = 0; t < 3; ++t) CHECK(back.value(t, 0, 1) == scalar.value(t, 0, 1));

    const auto lag = lag_logweight_covariate(net);
    std::ostringstream out2;
    write_covariate(out2, lag, net, {});
    std::istringstream in2(out2.str());
    const auto back2 = read_covariate(in2, "lag", net);
    REQUIRE(back2.kind() == CovariateKind::per_link);
    for (std::size_t t = 0; t < 3; ++t)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          if (i != j) CHECK(back2.value(t, i, j) == doctest::Approx(lag.value(t, i, j)).epsilon(1e-14));

    std::istringstream missing("t,value\n0,1\n2,1\n");
    CHECK_THROWS_AS(read_covariate(missing, "gap", net), DataError);
  }

  TEST_CASE("margins round trip") {
    const auto net = test::random_network(5, 3, 0.6, WeightFamily::gamma, 3);
    const auto m = margins_of(net);
    std::ostringstream out;
    write_margins(out, m, net, {});
    CHECK(out.str().find("t,node,deg_in,deg_out,str_in,str_out") != std::string::npos);
    std::istringstream in(out.str());
    const auto back = read_margins(in, 3, 5);
    CHECK(back.deg_in == m.deg_in);
    CHECK(back.deg_out == m.deg_out);
    for (std::size_t t = 0; t < 3; ++t)
      for (int i = 0; i < 5; ++i) {
        CHECK(back.str_in[t][i] == doctest::Approx(m.str_in[t][i]).epsilon(1e-14));
        CHECK(back.str_out[t][i] == doctest::Approx(m.str_out[t][i]).epsilon(1e-14));
      }
  }

  TEST_CASE("forecast round trip") {
    const auto net = test::random_network(3, 4, 0.5, WeightFamily::gamma, 4);
    ForecastRecord r;
    r.t = 3;
    r.has_observation = true;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (i != j) r.entries.push_back({i, j, 0.1 * (i + 1) + 0.01 * j, std::exp(0.3 * i - j), net.at(3).weight(i, j)});
    std::ostringstream out;
    write_forecasts(out, {r}, net, {});
    CHECK(first_line(out.str()).rfind("# sdnet", 0) == 0);
    std::istringstream in(out.str());
    const auto back = read_forecasts(in, net);
    REQUIRE(back.size() == 1);
    CHECK(back[0].t == 3);
    REQUIRE(back[0].entries.size() == r.entries.size());
    for (std::size_t k = 0; k < r.entries.size(); ++k) {
      CHECK(back[0].entries[k].src == r.entries[k].src);
      CHECK(back[0].entries[k].dst == r.entries[k].dst);
      CHECK(back[0].entries[k].prob == doctest::Approx(r.entries[k].prob).epsilon(1e-14));
      CHECK(back[0].entries[k].cond_mean == doctest::Approx(r.entries[k].cond_mean).epsilon(1e-14));
      CHECK(back[0].entries[k].observed == doctest::Approx(r.entries[k].observed).epsilon(1e-14));
    }
    std::istringstream bad("t,src,dst,prob,cond_mean,observed_weight\n1,0,1,1.5,1,0\n");
    CHECK_THROWS_AS(read_forecasts(bad, net), DataError);
  }

  TEST_CASE("fit result round trip") {
    FitResult fit;
    fit.model = "sd";
    fit.statics = test::statics_for(WeightFamily::lognormal, 3, 0.8);
    fit.statics.beta_bin = {0.25};
    fit.statics.beta_w = {-0.5};
    std::mt19937_64 rng(5);
    fit.fitness = test::random_state(3, rng);
    const auto text = fit_result_json(fit, {});
    std::istringstream in(text);
    const auto back = read_fit_result(in);
    CHECK(back.model == "sd");
    CHECK(back.statics.family == WeightFamily::lognormal);
    CHECK(back.statics.w == fit.statics.w);
    CHECK(back.statics.b == fit.statics.b);
    CHECK(back.statics.a == fit.statics.a);
    CHECK(back.statics.beta_bin == fit.statics.beta_bin);
    CHECK(back.statics.beta_w == fit.statics.beta_w);
    CHECK(back.statics.sigma == fit.statics.sigma);
    CHECK(back.fitness.bin_in == fit.fitness.bin_in);
    CHECK(back.fitness.w_out == fit.fitness.w_out);
    std::istringstream bad("{\"model\": \"sd\"}");
    CHECK_THROWS_AS(read_fit_result(bad), DataError);
  }

  TEST_CASE("metrics table layout") {
    std::ostringstream out;
    write_metrics(out, {{"sd", "mse_log", "test", 0.5}}, {});
    std::istringstream in(out.str());
    std::string stamp, header, row;
    std::getline(in, stamp);
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == "model,metric,split,value");
    CHECK(row.rfind("sd,mse_log,test,0.5", 0) == 0);
  }
}
