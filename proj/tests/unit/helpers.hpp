#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "sdnet/distributions.hpp"
#include "sdnet/network.hpp"

namespace sdnet::test {

/// Random snapshot with link probability `density` and weights drawn from
/// the family (integers for Poisson).
inline Snapshot random_snapshot(int n, double density, WeightFamily family, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j || u(rng) >= density) continue;
      const double w = family == WeightFamily::poisson ? std::floor(1.0 + 6.0 * u(rng))
                                                       : std::exp(2.0 * u(rng) - 1.0);
      edges.push_back({i, j, w});
    }
  return Snapshot(n, std::move(edges));
}

inline TemporalNetwork random_network(int n, std::size_t T, double density, WeightFamily family,
                                      std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Snapshot> snaps;
  for (std::size_t t = 0; t < T; ++t) snaps.push_back(random_snapshot(n, density, family, rng));
  return TemporalNetwork(n, std::move(snaps));
}

inline FitnessState random_state(int n, std::mt19937_64& rng, double scale = 0.7) {
  std::normal_distribution<double> z(0.0, scale);
  FitnessState f(n);
  for (int g = 0; g < 4; ++g)
    for (auto& v : f.group(g)) v = z(rng);
  return f;
}

inline StaticParams statics_for(WeightFamily family, int n, double sigma = 1.7) {
  StaticParams st = StaticParams::per_group(n, {0.0, 0.0, 0.0, 0.0}, {0.9, 0.9, 0.9, 0.9},
                                            {0.1, 0.1, 0.1, 0.1});
  st.family = family;
  st.sigma = sigma;
  return st;
}

inline bool close_rel(double a, double b, double rtol, double atol = 1e-12) {
  return std::abs(a - b) <= atol + rtol * std::max(std::abs(a), std::abs(b));
}

}  // namespace sdnet::test
