#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "sdnet/estimate.hpp"
#include "sdnet/simulate.hpp"

using namespace sdnet;

namespace {

/// Static-fitness network sampled from explicit node levels.
Simulation static_sample(int n, std::size_t T, std::uint64_t seed,
                         WeightFamily fam = WeightFamily::gamma) {
  DgpSpec spec;
  spec.kind = DgpKind::static_fitness;
  spec.n_nodes = n;
  spec.n_times = T;
  spec.targets = {-0.5, -0.5, 0.5, 0.5};
  spec.family = fam;
  spec.seed = seed;
  return simulate(spec);
}

double fitness_mse(const FitnessState& truth, const FitnessState& est) {
  const auto a = identify(truth).flat(), b = identify(est).flat();
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s / a.size();
}

}  // namespace

TEST_SUITE("estimate") {
  TEST_CASE("snapshot fit of a complete network saturates") {
    const Snapshot s(3, {{0, 1, 1.0}, {0, 2, 1.0}, {1, 0, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}, {2, 1, 1.0}});
    const auto fit = fit_snapshot(s, {}, 0);
    CHECK(fit.saturated);
    for (int i = 0; i < 3; ++i)
      CHECK(fit.fitness.bin_in[i] + fit.fitness.bin_out[i] >= kFitnessCap - 1e-6);
  }

  TEST_CASE("snapshot fit of a symmetric network has equal fitness") {
    const Snapshot s(4, {{0, 1, 2.0}, {1, 2, 2.0}, {2, 3, 2.0}, {3, 0, 2.0}});
    const auto fit = fit_snapshot(s, {}, 0);
    for (int i = 1; i < 4; ++i) {
      CHECK(fit.fitness.bin_in[i] == doctest::Approx(fit.fitness.bin_in[0]).epsilon(1e-8));
      CHECK(fit.fitness.bin_out[i] == doctest::Approx(fit.fitness.bin_out[0]).epsilon(1e-8));
      CHECK(fit.fitness.w_in[i] == doctest::Approx(fit.fitness.w_in[0]).epsilon(1e-8));
      CHECK(fit.fitness.w_out[i] == doctest::Approx(fit.fitness.w_out[0]).epsilon(1e-8));
    }
  }

  TEST_CASE("snapshot fit matches expected degrees and strengths") {
    std::mt19937_64 rng(3);
    std::vector<Edge> edges{{0, 1, 2.0}, {0, 2, 1.0}, {1, 2, 4.0}, {2, 3, 3.0},
                            {3, 0, 1.0}, {1, 3, 2.0}, {2, 1, 5.0}};
    const Snapshot s(4, edges);
    StaticFitConfig cfg;
    cfg.family = WeightFamily::poisson;
    const auto fit = fit_snapshot(s, {}, 0, cfg);
    REQUIRE(fit.converged);
    CHECK_FALSE(fit.saturated);
    const auto m = margins_of(TemporalNetwork(4, {s}));
    for (int k = 0; k < 4; ++k) {
      double ein = 0.0, eout = 0.0, sin = 0.0, sout = 0.0;
      for (int j = 0; j < 4; ++j) {
        if (j == k) continue;
        ein += link_probability({fit.fitness.bin_out[j] + fit.fitness.bin_in[k], 0.0});
        eout += link_probability({fit.fitness.bin_out[k] + fit.fitness.bin_in[j], 0.0});
        if (s.has_link(j, k)) sin += std::exp(fit.fitness.w_out[j] + fit.fitness.w_in[k]);
        if (s.has_link(k, j)) sout += std::exp(fit.fitness.w_out[k] + fit.fitness.w_in[j]);
      }
      CHECK(std::abs(ein - m.deg_in[0][k]) < 1e-6);
      CHECK(std::abs(eout - m.deg_out[0][k]) < 1e-6);
      CHECK(std::abs(sin - m.str_in[0][k]) < 1e-6);
      CHECK(std::abs(sout - m.str_out[0][k]) < 1e-6);
    }
  }

  TEST_CASE("scores vanish at an interior snapshot fit") {
    std::mt19937_64 rng(4);
    for (auto fam : {WeightFamily::gamma, WeightFamily::lognormal}) {
      const auto s = test::random_snapshot(6, 0.5, fam, rng);
      StaticFitConfig cfg;
      cfg.family = fam;
      const auto fit = fit_snapshot(s, {}, 0, cfg);
      if (fit.saturated) continue;
      auto st = test::statics_for(fam, 6, fit.sigma);
      const auto terms = snapshot_terms(s, fit.fitness, {}, 0, st);
      for (double v : terms.score.flat()) CHECK(std::abs(v) < 1e-6);
    }
  }

  TEST_CASE("snapshot fit refuses beta with a scalar covariate") {
    ModelCovariates cov;
    cov.binary = CovariateSet::scalar("x", {1.0});
    CHECK_THROWS_WITH_AS(fit_snapshot(Snapshot(3, {{0, 1, 1.0}}), cov, 0),
                         "unidentified: c1+c2+c3 degeneracy", std::invalid_argument);
  }

  TEST_CASE("snapshot sequence lifts the snapshot fit") {
    const auto net = test::random_network(5, 3, 0.5, WeightFamily::gamma, 6);
    const auto seq = fit_snapshot_sequence(net, {});
    for (std::size_t t = 0; t < 3; ++t) {
      const auto one = fit_snapshot(net.at(t), {}, t);
      CHECK(seq.path.states[t].flat() == one.fitness.flat());
      CHECK_FALSE(seq.carried[t]);
    }
  }

  TEST_CASE("snapshot sequence of a constant network is constant") {
    const Snapshot s(4, {{0, 1, 2.0}, {1, 2, 1.0}, {2, 0, 3.0}, {3, 1, 1.5}});
    const auto seq = fit_snapshot_sequence(TemporalNetwork(4, {s, s, s}), {});
    CHECK(seq.path.states[1].flat() == seq.path.states[0].flat());
    CHECK(seq.path.states[2].flat() == seq.path.states[0].flat());
  }

  TEST_CASE("empty snapshot carries the previous state") {
    const Snapshot s(4, {{0, 1, 2.0}, {1, 2, 1.0}, {2, 0, 3.0}, {3, 1, 1.5}});
    const auto seq = fit_snapshot_sequence(TemporalNetwork(4, {s, Snapshot(4, {}), s}), {});
    CHECK(seq.carried[1]);
    CHECK_FALSE(seq.carried[2]);
    CHECK(seq.path.states[1].flat() == seq.path.states[0].flat());
  }

  TEST_CASE("snapshot sequence does not depend on the thread count") {
    const auto net = test::random_network(5, 8, 0.5, WeightFamily::gamma, 7);
    const auto a = fit_snapshot_sequence(net, {}, {}, 1);
    const auto b = fit_snapshot_sequence(net, {}, {}, 3);
    for (std::size_t t = 0; t < 8; ++t) CHECK(a.path.states[t].flat() == b.path.states[t].flat());
  }

  TEST_CASE("constant fit is consistent in T") {
    const auto short_run = static_sample(12, 50, 21);
    const auto long_run = static_sample(12, 200, 21);
    REQUIRE(short_run.truth.states[0].flat() == long_run.truth.states[0].flat());
    const auto a = fit_constant(short_run.net, {});
    const auto b = fit_constant(long_run.net, {});
    CHECK(a.converged);
    CHECK(b.converged);
    const double mse_short = fitness_mse(short_run.truth.states[0], a.fitness);
    const double mse_long = fitness_mse(long_run.truth.states[0], b.fitness);
    CHECK(mse_long / mse_short < 0.5);
    double s_in = 0.0, s_out = 0.0;
    for (int i = 0; i < 12; ++i) {
      s_in += b.fitness.bin_in[i];
      s_out += b.fitness.bin_out[i];
    }
    CHECK(std::abs(s_in - s_out) < 1e-9);
  }

  TEST_CASE("constant fit recovers beta with an AR(1) covariate") {
    DgpSpec spec;
    spec.kind = DgpKind::static_fitness;
    spec.n_nodes = 15;
    spec.n_times = 150;
    spec.beta_bin = 1.0;
    spec.beta_w = 1.0;
    spec.covariate.noise_sd = 0.5;
    spec.seed = 4;
    const auto sim = simulate(spec);
    const auto fit = fit_constant(sim.net, sim.cov);
    CHECK(std::abs(fit.estimate("beta_bin") - 1.0) < 3 * fit.std_error("beta_bin"));
    CHECK(std::abs(fit.estimate("beta_w") - 1.0) < 3 * fit.std_error("beta_w"));
    CHECK(fit.std_error("beta_w") < 0.1);
  }

  TEST_CASE("beta rescales inversely with a per-link covariate") {
    const auto sim = static_sample(8, 40, 5);
    ModelCovariates cov;
    cov.weight = lag_logweight_covariate(sim.net);
    ModelCovariates scaled;
    scaled.weight = cov.weight.affine(2.5, 0.7);
    StaticFitConfig cfg;
    cfg.parts = ModelParts::weight;
    const auto a = fit_constant(sim.net, cov, cfg);
    const auto b = fit_constant(sim.net, scaled, cfg);
    CHECK(b.estimate("beta_w") == doctest::Approx(a.estimate("beta_w") / 2.5).epsilon(1e-4));
    CHECK(b.loglik == doctest::Approx(a.loglik).epsilon(1e-8));
  }

  TEST_CASE("no-fitness intercept reproduces the observed density") {
    const auto net = test::random_network(8, 20, 0.3, WeightFamily::gamma, 8);
    const auto fit = fit_nofitness(net, {});
    long links = 0;
    for (const auto& s : net.snapshots()) links += static_cast<long>(s.n_links());
    const double density = static_cast<double>(links) / (20.0 * 8 * 7);
    CHECK(link_probability({fit.estimate("intercept_bin"), 0.0}) == doctest::Approx(density).epsilon(1e-6));
  }

  TEST_CASE("no-fitness fit recovers beta on a homogeneous network") {
    DgpSpec spec;
    spec.kind = DgpKind::static_fitness;
    spec.n_nodes = 12;
    spec.n_times = 100;
    spec.level_spread = 0.0;
    spec.targets = {-0.5, -0.5, 0.25, 0.25};
    spec.beta_bin = 1.0;
    spec.beta_w = 1.0;
    spec.covariate.noise_sd = 0.5;
    spec.seed = 9;
    const auto sim = simulate(spec);
    const auto fit = fit_nofitness(sim.net, sim.cov);
    CHECK(std::abs(fit.estimate("beta_bin") - 1.0) < 3 * fit.std_error("beta_bin"));
    CHECK(std::abs(fit.estimate("beta_w") - 1.0) < 3 * fit.std_error("beta_w"));
  }

  TEST_CASE("no-fitness fit of an empty network saturates") {
    const TemporalNetwork net(4, {Snapshot(4, {}), Snapshot(4, {})});
    const auto fit = fit_nofitness(net, {}, StaticFitConfig{.parts = ModelParts::binary});
    CHECK(fit.estimate("intercept_bin") <= -kFitnessCap + 1e-6);
    bool flagged = false;
    for (const auto& w : fit.warnings) flagged |= w.find("saturated") != std::string::npos;
    CHECK(flagged);
  }

  TEST_CASE("AR(1) recovery") {
    std::mt19937_64 rng(10);
    std::normal_distribution<double> eps(0.0, 0.1);
    std::vector<double> x{5.0};
    for (int t = 1; t < 1000; ++t) x.push_back(0.1 + 0.98 * x.back() + eps(rng));
    const auto fit = fit_ar1(x);
    CHECK(std::abs(fit.b1 - 0.98) < 3 * fit.se_b1);
  }

  TEST_CASE("AR(1) of an exact recursion") {
    std::vector<double> x{2.0};
    for (int t = 1; t < 50; ++t) x.push_back(0.3 + 0.7 * x.back());
    const auto fit = fit_ar1(x);
    CHECK(std::abs(fit.b0 - 0.3) < 1e-10);
    CHECK(std::abs(fit.b1 - 0.7) < 1e-10);
    CHECK(forecast_ar1(Ar1Fit{0.4, 0.0}, 17.0) == 0.4);
    CHECK_THROWS_WITH_AS(fit_ar1({1.0, 1.0, 1.0, 1.0}), "degenerate AR(1)", std::invalid_argument);
  }

  TEST_CASE("score-driven fit is deterministic and recovers persistence") {
    DgpSpec spec;
    spec.kind = DgpKind::sd_self;
    spec.n_nodes = 8;
    spec.n_times = 250;
    spec.seed = 3;
    const auto sim = simulate(spec);
    SdFitConfig cfg;
    const auto a = fit_sd(sim.net, sim.cov, cfg);
    const auto b = fit_sd(sim.net, sim.cov, cfg);
    CHECK(a.loglik == b.loglik);
    CHECK(a.converged);
    CHECK(a.path.n_times() == 250);
    CHECK(a.loglik == doctest::Approx(a.path.total()).epsilon(1e-10));
    for (const char* k : {"b_bin_in", "b_bin_out", "b_w_in", "b_w_out"}) {
      CHECK(std::abs(a.estimate(k) - 0.95) < 4 * a.std_error(k));
    }
    CHECK(std::abs(a.estimate("sigma") - 2.0) < 4 * a.std_error("sigma"));
  }

  TEST_CASE("score-driven objective is invariant to the shift of f0") {
    const auto sim = static_sample(6, 30, 11);
    const auto st = StaticParams::per_group(6, {0.0, 0.0, 0.01, 0.01}, {0.9, 0.9, 0.9, 0.9},
                                            {0.1, 0.1, 0.05, 0.05});
    auto f0 = sim.truth.states[0];
    auto g0 = f0;
    for (auto& v : g0.bin_in) v += 0.8;
    for (auto& v : g0.bin_out) v -= 0.8;
    for (auto& v : g0.w_in) v -= 0.3;
    for (auto& v : g0.w_out) v += 0.3;
    const double a = filter_path(sim.net, {}, st, f0).total();
    const double b = filter_path(sim.net, {}, st, g0).total();
    CHECK(std::abs(a - b) < 1e-8 * std::abs(a));
  }

  TEST_CASE("never-active nodes produce a warning") {
    auto base = test::random_network(5, 20, 0.5, WeightFamily::gamma, 12);
    std::vector<Snapshot> snaps;
    for (const auto& s : base.snapshots()) {
      std::vector<Edge> keep;
      for (const auto& e : s.edges())
        if (e.src != 4 && e.dst != 4) keep.push_back(e);
      snaps.emplace_back(5, keep);
    }
    const TemporalNetwork net(5, snaps);
    SdFitConfig cfg;
    cfg.std_errors = false;
    cfg.optim.max_iters = 30;
    const auto fit = fit_sd(net, {}, cfg);
    bool warned = false;
    for (const auto& w : fit.warnings) warned |= w.find("node 4") != std::string::npos;
    CHECK(warned);
  }

  TEST_CASE("poisson full-matrix likelihood is not a function of the margins") {
    // same degrees and strengths, different pairing of the links
    const Snapshot a(4, {{0, 1, 1.0}, {2, 3, 1.0}});
    const Snapshot b(4, {{0, 3, 1.0}, {2, 1, 1.0}});
    const auto ma = margins_of(TemporalNetwork(4, {a}));
    const auto mb = margins_of(TemporalNetwork(4, {b}));
    CHECK(ma.deg_in == mb.deg_in);
    CHECK(ma.deg_out == mb.deg_out);
    CHECK(ma.str_in == mb.str_in);
    CHECK(ma.str_out == mb.str_out);
    FitnessState f(4);
    f.w_out = {0.0, 0.0, 1.0, 0.0};
    f.w_in = {0.0, 0.0, 0.0, 1.0};
    const auto st = test::statics_for(WeightFamily::poisson, 4);
    const double la = snapshot_loglik(a, f, {}, 0, st);
    const double lb = snapshot_loglik(b, f, {}, 0, st);
    CHECK(std::abs(la - lb) > 1.0);
    const auto ta = margins_terms(ma, 0, f, CovariateSet{}, st);
    const auto tb = margins_terms(mb, 0, f, CovariateSet{}, st);
    CHECK(ta.loglik() == tb.loglik());
  }

  TEST_CASE("binary half from margins equals the full-matrix binary half") {
    DgpSpec spec;
    spec.kind = DgpKind::sd_self;
    spec.n_nodes = 6;
    spec.n_times = 60;
    spec.family = WeightFamily::poisson;
    spec.seed = 5;
    const auto sim = simulate(spec);
    SdFitConfig cfg;
    cfg.family = WeightFamily::poisson;
    cfg.parts = ModelParts::binary;
    cfg.std_errors = false;
    const auto full = fit_sd(sim.net, {}, cfg);
    const auto marg = fit_poisson_margins(margins_of(sim.net), CovariateSet{}, cfg);
    CHECK(marg.loglik_bin == doctest::Approx(full.loglik_bin).epsilon(1e-10));
    for (const auto& [k, v] : full.estimates) CHECK(marg.estimate(k) == doctest::Approx(v).epsilon(1e-6));
  }

  TEST_CASE("margins fit rejects inconsistent margins") {
    auto m = margins_of(test::random_network(4, 12, 0.5, WeightFamily::poisson, 2));
    m.str_in[3][0] += 1.0;
    SdFitConfig cfg;
    cfg.family = WeightFamily::poisson;
    CHECK_THROWS_AS(fit_poisson_margins(m, CovariateSet{}, cfg), std::invalid_argument);
  }
}
