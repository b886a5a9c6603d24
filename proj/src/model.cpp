#include "sdnet/model.hpp"

#include <cmath>

namespace sdnet {

std::string to_string(WeightFamily f) {
  switch (f) {
    case WeightFamily::gamma: return "gamma";
    case WeightFamily::poisson: return "poisson";
    case WeightFamily::lognormal: return "lognormal";
  }
  return "unknown";
}

std::string to_string(TieMode m) {
  switch (m) {
    case TieMode::per_node: return "per-node";
    case TieMode::per_group: return "per-group";
    case TieMode::targeted: return "targeted";
  }
  return "unknown";
}

std::string to_string(ModelParts p) {
  switch (p) {
    case ModelParts::both: return "both";
    case ModelParts::binary: return "binary";
    case ModelParts::weight: return "weight";
  }
  return "unknown";
}

std::string to_string(Curvature c) {
  return c == Curvature::observed ? "observed" : "expected";
}

WeightFamily parse_family(const std::string& s) {
  if (s == "gamma") return WeightFamily::gamma;
  if (s == "poisson") return WeightFamily::poisson;
  if (s == "lognormal") return WeightFamily::lognormal;
  throw std::invalid_argument("unknown weight family '" + s + "'");
}

TieMode parse_tie_mode(const std::string& s) {
  if (s == "per-node" || s == "per_node") return TieMode::per_node;
  if (s == "per-group" || s == "per_group") return TieMode::per_group;
  if (s == "targeted") return TieMode::targeted;
  throw std::invalid_argument("unknown tie mode '" + s + "'");
}

ModelParts parse_parts(const std::string& s) {
  if (s == "both") return ModelParts::both;
  if (s == "binary") return ModelParts::binary;
  if (s == "weight") return ModelParts::weight;
  throw std::invalid_argument("unknown model parts '" + s + "'");
}

Curvature parse_curvature(const std::string& s) {
  if (s == "observed") return Curvature::observed;
  if (s == "expected") return Curvature::expected;
  throw std::invalid_argument("unknown curvature '" + s + "'");
}

StaticParams StaticParams::per_group(int n_nodes, const double (&w)[4], const double (&b)[4],
                                     const double (&a)[4]) {
  StaticParams p;
  const auto n = static_cast<std::size_t>(n_nodes);
  p.w.resize(4 * n);
  p.b.resize(4 * n);
  p.a.resize(4 * n);
  for (int g = 0; g < 4; ++g) {
    for (std::size_t i = 0; i < n; ++i) {
      p.w[g * n + i] = w[g];
      p.b[g * n + i] = b[g];
      p.a[g * n + i] = a[g];
    }
  }
  p.tie_mode = TieMode::per_group;
  return p;
}

void StaticParams::validate() const {
  if (w.empty() || w.size() % 4 != 0 || b.size() != w.size() || a.size() != w.size())
    throw std::invalid_argument("static parameters must have length 4N");
  const auto n = w.size() / 4;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (!std::isfinite(w[k])) throw std::invalid_argument("w must be finite");
    if (!(b[k] > 0.0 && b[k] < 1.0)) throw std::invalid_argument("b must lie in (0,1)");
    if (!(a[k] >= 0.0) || !std::isfinite(a[k])) throw std::invalid_argument("a must be >= 0");
  }
  for (const auto* beta : {&beta_bin, &beta_w}) {
    if (beta->size() != 1 && beta->size() != 2 * n)
      throw std::invalid_argument("beta must have length 1 or 2N");
    for (double v : *beta)
      if (!std::isfinite(v)) throw std::invalid_argument("beta must be finite");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be > 0");
  if (!(scaling_power > 0.0)) throw std::invalid_argument("scaling power must be > 0");
  if (tie_mode != TieMode::per_node) {
    const bool tie_w = tie_mode == TieMode::per_group;
    for (int g = 0; g < 4; ++g)
      for (std::size_t i = 1; i < n; ++i)
        if ((tie_w && w[g * n + i] != w[g * n]) || b[g * n + i] != b[g * n] ||
            a[g * n + i] != a[g * n])
          throw std::invalid_argument("tied statics must be constant within a group");
  }
}

}  // namespace sdnet
