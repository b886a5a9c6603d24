#include "sdnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sdnet {

Snapshot::Snapshot(int n_nodes, std::vector<Edge> edges)
    : n_nodes_(n_nodes), edges_(std::move(edges)) {
  if (n_nodes <= 0) throw std::invalid_argument("snapshot needs a positive node count");
  for (const auto& e : edges_) {
    if (e.src < 0 || e.src >= n_nodes || e.dst < 0 || e.dst >= n_nodes)
      throw std::invalid_argument("edge index out of range: " + std::to_string(e.src) +
                                  " -> " + std::to_string(e.dst));
    if (e.src == e.dst)
      throw std::invalid_argument("self-loop on node " + std::to_string(e.src));
    if (!(e.weight > 0.0) || !std::isfinite(e.weight))
      throw std::invalid_argument("edge weight must be finite and > 0");
  }
  std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return a.src != b.src ? a.src < b.src : a.dst < b.dst;
  });
  for (std::size_t k = 1; k < edges_.size(); ++k) {
    if (edges_[k].src == edges_[k - 1].src && edges_[k].dst == edges_[k - 1].dst)
      throw std::invalid_argument("duplicate edge " + std::to_string(edges_[k].src) +
                                  " -> " + std::to_string(edges_[k].dst));
  }
}

double Snapshot::weight(int i, int j) const {
  auto it = std::lower_bound(edges_.begin(), edges_.end(), std::pair{i, j},
                             [](const Edge& e, const std::pair<int, int>& key) {
                               return e.src != key.first ? e.src < key.first
                                                         : e.dst < key.second;
                             });
  if (it != edges_.end() && it->src == i && it->dst == j) return it->weight;
  return 0.0;
}

std::vector<double> Snapshot::dense() const {
  std::vector<double> out(static_cast<std::size_t>(n_nodes_) * n_nodes_, 0.0);
  for (const auto& e : edges_) out[static_cast<std::size_t>(e.src) * n_nodes_ + e.dst] = e.weight;
  return out;
}

TemporalNetwork::TemporalNetwork(int n_nodes, std::vector<Snapshot> snapshots,
                                 std::vector<std::string> node_labels)
    : n_nodes_(n_nodes), snapshots_(std::move(snapshots)), labels_(std::move(node_labels)) {
  if (n_nodes <= 0) throw std::invalid_argument("network needs a positive node count");
  for (auto& s : snapshots_) {
    if (s.n_nodes() == 0) s = Snapshot(n_nodes, {});
    if (s.n_nodes() != n_nodes) throw std::invalid_argument("snapshot node count mismatch");
  }
  if (!labels_.empty() && static_cast<int>(labels_.size()) != n_nodes)
    throw std::invalid_argument("node label count mismatch");
}

TemporalNetwork TemporalNetwork::slice(std::size_t begin, std::size_t end) const {
  if (begin > end || end > snapshots_.size()) throw std::out_of_range("bad network slice");
  return TemporalNetwork(n_nodes_,
                         std::vector<Snapshot>(snapshots_.begin() + begin, snapshots_.begin() + end),
                         labels_);
}

TemporalNetwork TemporalNetwork::permuted(std::span<const int> perm) const {
  if (static_cast<int>(perm.size()) != n_nodes_) throw std::invalid_argument("bad permutation");
  std::vector<Snapshot> out;
  out.reserve(snapshots_.size());
  for (const auto& s : snapshots_) {
    std::vector<Edge> edges;
    edges.reserve(s.n_links());
    for (const auto& e : s.edges()) edges.push_back({perm[e.src], perm[e.dst], e.weight});
    out.emplace_back(n_nodes_, std::move(edges));
  }
  return TemporalNetwork(n_nodes_, std::move(out));
}

bool TemporalNetwork::has_integer_weights() const {
  for (const auto& s : snapshots_)
    for (const auto& e : s.edges())
      if (e.weight != std::floor(e.weight)) return false;
  return true;
}

CovariateSet CovariateSet::none(std::size_t n_times) {
  CovariateSet c;
  c.n_times_ = n_times;
  return c;
}

CovariateSet CovariateSet::scalar(std::string name, std::vector<double> values) {
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("covariate '" + name + "' has non-finite values");
  CovariateSet c;
  c.kind_ = CovariateKind::scalar;
  c.name_ = std::move(name);
  c.n_times_ = values.size();
  c.scalar_ = std::move(values);
  return c;
}

CovariateSet CovariateSet::per_link(std::string name, int n_nodes,
                                    std::vector<std::vector<double>> matrices) {
  const auto n2 = static_cast<std::size_t>(n_nodes) * n_nodes;
  for (const auto& m : matrices) {
    if (m.size() != n2) throw std::invalid_argument("covariate '" + name + "' has a wrong matrix size");
    for (double v : m)
      if (!std::isfinite(v)) throw std::invalid_argument("covariate '" + name + "' has non-finite values");
  }
  CovariateSet c;
  c.kind_ = CovariateKind::per_link;
  c.name_ = std::move(name);
  c.n_nodes_ = n_nodes;
  c.n_times_ = matrices.size();
  c.links_ = std::move(matrices);
  return c;
}

CovariateSet CovariateSet::slice(std::size_t begin, std::size_t end) const {
  if (kind_ == CovariateKind::none) return none(end - begin);
  if (begin > end || end > n_times_) throw std::out_of_range("bad covariate slice");
  if (kind_ == CovariateKind::scalar)
    return scalar(name_, std::vector<double>(scalar_.begin() + begin, scalar_.begin() + end));
  return per_link(name_, n_nodes_,
                  std::vector<std::vector<double>>(links_.begin() + begin, links_.begin() + end));
}

CovariateSet CovariateSet::affine(double scale, double shift) const {
  CovariateSet out = *this;
  for (auto& v : out.scalar_) v = scale * v + shift;
  for (auto& m : out.links_)
    for (auto& v : m) v = scale * v + shift;
  return out;
}

std::vector<double> FitnessState::flat() const {
  std::vector<double> out;
  out.reserve(4 * bin_in.size());
  for (int g = 0; g < 4; ++g) out.insert(out.end(), group(g).begin(), group(g).end());
  return out;
}

FitnessState FitnessState::from_flat(std::span<const double> values) {
  if (values.size() % 4 != 0) throw std::invalid_argument("fitness vector length must be 4N");
  const int n = static_cast<int>(values.size() / 4);
  FitnessState f(n);
  for (int g = 0; g < 4; ++g)
    std::copy(values.begin() + g * n, values.begin() + (g + 1) * n, f.group(g).begin());
  return f;
}

std::vector<double>& FitnessState::group(int g) {
  switch (g) {
    case 0: return bin_in;
    case 1: return bin_out;
    case 2: return w_in;
    case 3: return w_out;
  }
  throw std::out_of_range("fitness group");
}

const std::vector<double>& FitnessState::group(int g) const {
  return const_cast<FitnessState*>(this)->group(g);
}

bool FitnessState::all_finite() const {
  for (int g = 0; g < 4; ++g)
    for (double v : group(g))
      if (!std::isfinite(v)) return false;
  return true;
}

void Margins::validate() const {
  const std::size_t T = deg_in.size();
  if (deg_out.size() != T || str_in.size() != T || str_out.size() != T)
    throw std::invalid_argument("margins: inconsistent number of time steps");
  const std::size_t n = T ? deg_in[0].size() : 0;
  for (std::size_t t = 0; t < T; ++t) {
    if (deg_in[t].size() != n || deg_out[t].size() != n || str_in[t].size() != n ||
        str_out[t].size() != n)
      throw std::invalid_argument("margins: inconsistent node count at t=" + std::to_string(t));
    long din = 0, dout = 0;
    double sin = 0.0, sout = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (deg_in[t][i] < 0 || deg_out[t][i] < 0 || str_in[t][i] < 0.0 || str_out[t][i] < 0.0)
        throw std::invalid_argument("margins: negative entry at t=" + std::to_string(t));
      if ((deg_in[t][i] == 0) != (str_in[t][i] == 0.0) ||
          (deg_out[t][i] == 0) != (str_out[t][i] == 0.0))
        throw std::invalid_argument("margins: strength/degree support mismatch at t=" +
                                    std::to_string(t));
      din += deg_in[t][i];
      dout += deg_out[t][i];
      sin += str_in[t][i];
      sout += str_out[t][i];
    }
    if (din != dout)
      throw std::invalid_argument("margins: degree totals differ at t=" + std::to_string(t));
    if (std::abs(sin - sout) > 1e-9 * std::max(1.0, std::abs(sin)))
      throw std::invalid_argument("margins: strength totals differ at t=" + std::to_string(t));
  }
}

Margins margins_of(const TemporalNetwork& net) {
  const std::size_t T = net.n_times();
  const int n = net.n_nodes();
  Margins m;
  m.deg_in.assign(T, std::vector<int>(n, 0));
  m.deg_out.assign(T, std::vector<int>(n, 0));
  m.str_in.assign(T, std::vector<double>(n, 0.0));
  m.str_out.assign(T, std::vector<double>(n, 0.0));
  for (std::size_t t = 0; t < T; ++t) {
    for (const auto& e : net.at(t).edges()) {
      m.deg_out[t][e.src] += 1;
      m.deg_in[t][e.dst] += 1;
      m.str_out[t][e.src] += e.weight;
      m.str_in[t][e.dst] += e.weight;
    }
  }
  return m;
}

namespace {

template <typename F>
CovariateSet lagged(const TemporalNetwork& net, std::string name, F transform) {
  if (net.n_times() < 2) throw std::invalid_argument("insufficient history");
  const int n = net.n_nodes();
  const auto n2 = static_cast<std::size_t>(n) * n;
  std::vector<std::vector<double>> mats(net.n_times(), std::vector<double>(n2, 0.0));
  for (std::size_t t = 1; t < net.n_times(); ++t)
    for (const auto& e : net.at(t - 1).edges())
      mats[t][static_cast<std::size_t>(e.src) * n + e.dst] = transform(e.weight);
  return CovariateSet::per_link(std::move(name), n, std::move(mats));
}

}  // namespace

CovariateSet lag_indicator_covariate(const TemporalNetwork& net) {
  return lagged(net, "lag_indicator", [](double) { return 1.0; });
}

CovariateSet lag_logweight_covariate(const TemporalNetwork& net) {
  return lagged(net, "lag_logweight", [](double w) { return std::log(w); });
}

}  // namespace sdnet
