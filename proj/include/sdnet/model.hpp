#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sdnet {

enum class WeightFamily { gamma, poisson, lognormal };
/// per_group shares (w, b, a) within each of the four fitness groups.
/// targeted shares b and a per group and sets w_i = omega / 2 + (1 - b)(m_i - mean m)
/// around pooled static levels m_i, so long-run means stay node specific.
enum class TieMode { per_node, per_group, targeted };
/// Which halves of the model are evaluated. The binary and weighted halves
/// have disjoint parameters and separate log-likelihood terms.
enum class ModelParts { both, binary, weight };
/// Curvature behind the scaling of the weighted score: the observed negative
/// Hessian, or its expectation given which links are present.
enum class Curvature { observed, expected };

std::string to_string(WeightFamily f);
std::string to_string(TieMode m);
std::string to_string(ModelParts p);
std::string to_string(Curvature c);
WeightFamily parse_family(const std::string& s);
TieMode parse_tie_mode(const std::string& s);
ModelParts parse_parts(const std::string& s);
Curvature parse_curvature(const std::string& s);

/// Raised when a recursion or fit produces non-finite values.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, int node = -1)
      : std::runtime_error(what), node_(node) {}
  int node() const { return node_; }

 private:
  int node_;
};

/// Static parameters of the score-driven recursion and the observation model.
/// w, b, a use the flat fitness layout [bin_in, bin_out, w_in, w_out] (4N).
/// beta vectors have length 1 (uniform) or 2N (source-node coefficients
/// followed by destination-node coefficients).
struct StaticParams {
  std::vector<double> w;
  std::vector<double> b;
  std::vector<double> a;
  std::vector<double> beta_bin{0.0};
  std::vector<double> beta_w{0.0};
  double sigma = 1.0;
  WeightFamily family = WeightFamily::gamma;
  TieMode tie_mode = TieMode::per_group;
  ModelParts parts = ModelParts::both;
  /// Scaled score uses curvature^(-scaling_power); 1 is the inverse Hessian
  /// diagonal, 0.5 the inverse square root.
  double scaling_power = 1.0;
  Curvature curvature = Curvature::expected;

  int n_nodes() const { return static_cast<int>(w.size() / 4); }

  /// Group-level values broadcast to all nodes; arrays are indexed by
  /// fitness group (bin_in, bin_out, w_in, w_out).
  static StaticParams per_group(int n_nodes, const double (&w)[4], const double (&b)[4],
                                const double (&a)[4]);

  /// Throws std::invalid_argument when shapes or ranges are violated.
  void validate() const;
};

/// Coefficient multiplying X_ij for a uniform or node-specific beta vector.
inline double link_coefficient(const std::vector<double>& beta, int i, int j, int n) {
  return beta.size() == 1 ? beta[0] : beta[i] + beta[n + j];
}

}  // namespace sdnet
