#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace sdnet {

/// A directed link with a strictly positive weight.
struct Edge {
  int src = 0;
  int dst = 0;
  double weight = 0.0;
};

/// One observation of the network: the nonzero entries of an N x N weight
/// matrix, sorted by (src, dst). Absent entries encode a zero weight.
class Snapshot {
 public:
  Snapshot() = default;
  /// Validates and sorts. Throws std::invalid_argument on self-loops,
  /// non-positive or non-finite weights, out-of-range indices or duplicates.
  Snapshot(int n_nodes, std::vector<Edge> edges);

  int n_nodes() const { return n_nodes_; }
  std::size_t n_links() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  bool empty() const { return edges_.empty(); }

  /// Weight of i -> j, 0 when absent.
  double weight(int i, int j) const;
  bool has_link(int i, int j) const { return weight(i, j) > 0.0; }

  /// Row-major N x N dense copy.
  std::vector<double> dense() const;

 private:
  int n_nodes_ = 0;
  std::vector<Edge> edges_;
};

/// Ordered sequence of snapshots over a fixed node set.
class TemporalNetwork {
 public:
  TemporalNetwork() = default;
  TemporalNetwork(int n_nodes, std::vector<Snapshot> snapshots,
                  std::vector<std::string> node_labels = {});

  int n_nodes() const { return n_nodes_; }
  std::size_t n_times() const { return snapshots_.size(); }
  const Snapshot& at(std::size_t t) const { return snapshots_.at(t); }
  const std::vector<Snapshot>& snapshots() const { return snapshots_; }
  const std::vector<std::string>& node_labels() const { return labels_; }

  /// Snapshots [begin, end) as a new network with the same node set.
  TemporalNetwork slice(std::size_t begin, std::size_t end) const;
  /// Relabel nodes: node i becomes perm[i].
  TemporalNetwork permuted(std::span<const int> perm) const;

  bool has_integer_weights() const;

 private:
  int n_nodes_ = 0;
  std::vector<Snapshot> snapshots_;
  std::vector<std::string> labels_;
};

enum class CovariateKind { none, scalar, per_link };

/// Regressor values X_ij(t). A scalar covariate is uniform across links;
/// a per-link covariate stores one dense row-major N x N matrix per time.
class CovariateSet {
 public:
  CovariateSet() = default;

  static CovariateSet none(std::size_t n_times = 0);
  static CovariateSet scalar(std::string name, std::vector<double> values);
  static CovariateSet per_link(std::string name, int n_nodes,
                               std::vector<std::vector<double>> matrices);

  CovariateKind kind() const { return kind_; }
  bool is_none() const { return kind_ == CovariateKind::none; }
  const std::string& name() const { return name_; }
  std::size_t n_times() const { return n_times_; }
  int n_nodes() const { return n_nodes_; }

  double value(std::size_t t, int i, int j) const {
    switch (kind_) {
      case CovariateKind::none:
        return 0.0;
      case CovariateKind::scalar:
        return scalar_[t];
      case CovariateKind::per_link:
        return links_[t][static_cast<std::size_t>(i) * n_nodes_ + j];
    }
    return 0.0;
  }
  /// Scalar kind only.
  const std::vector<double>& scalar_values() const { return scalar_; }
  /// Per-link kind only.
  const std::vector<double>& matrix(std::size_t t) const { return links_.at(t); }

  CovariateSet slice(std::size_t begin, std::size_t end) const;
  /// Affine map x -> scale * x + shift applied to every value.
  CovariateSet affine(double scale, double shift) const;

 private:
  CovariateKind kind_ = CovariateKind::none;
  std::string name_;
  std::size_t n_times_ = 0;
  int n_nodes_ = 0;
  std::vector<double> scalar_;
  std::vector<std::vector<double>> links_;
};

/// Covariates entering the link-probability and the conditional-mean
/// predictors. Either may be `none`.
struct ModelCovariates {
  CovariateSet binary;
  CovariateSet weight;

  ModelCovariates slice(std::size_t begin, std::size_t end) const {
    return {binary.slice(begin, end), weight.slice(begin, end)};
  }
};

/// Per-node fitness at one time: binary in/out and weighted in/out.
/// Link i -> j uses bin_out[i] + bin_in[j] and w_out[i] + w_in[j].
struct FitnessState {
  std::vector<double> bin_in;
  std::vector<double> bin_out;
  std::vector<double> w_in;
  std::vector<double> w_out;

  FitnessState() = default;
  explicit FitnessState(int n_nodes, double value = 0.0)
      : bin_in(n_nodes, value), bin_out(n_nodes, value), w_in(n_nodes, value),
        w_out(n_nodes, value) {}

  int n_nodes() const { return static_cast<int>(bin_in.size()); }

  /// Flat layout [bin_in, bin_out, w_in, w_out], length 4N.
  std::vector<double> flat() const;
  static FitnessState from_flat(std::span<const double> values);

  /// Group g in 0..3 following the flat layout.
  std::vector<double>& group(int g);
  const std::vector<double>& group(int g) const;

  bool all_finite() const;
};

/// Degree and strength sequences, T x N each.
struct Margins {
  std::vector<std::vector<int>> deg_in;
  std::vector<std::vector<int>> deg_out;
  std::vector<std::vector<double>> str_in;
  std::vector<std::vector<double>> str_out;

  std::size_t n_times() const { return deg_in.size(); }
  int n_nodes() const { return deg_in.empty() ? 0 : static_cast<int>(deg_in[0].size()); }

  /// Throws std::invalid_argument when shapes or per-time totals disagree.
  void validate() const;
};

Margins margins_of(const TemporalNetwork& net);

/// X(t)_ij = 1{Y(t-1)_ij > 0}; X(0) = 0.
CovariateSet lag_indicator_covariate(const TemporalNetwork& net);
/// X(t)_ij = 1{Y(t-1)_ij > 0} log Y(t-1)_ij; X(0) = 0.
CovariateSet lag_logweight_covariate(const TemporalNetwork& net);

}  // namespace sdnet
