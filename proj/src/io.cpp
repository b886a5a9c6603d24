#include "sdnet/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace sdnet {

using nlohmann::json;

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int k = 15; k >= 0; --k, v >>= 4) s[k] = digits[v & 0xf];
  return s;
}

std::string FileStamp::line() const {
  return "# sdnet " SDNET_VERSION " config=" + config_hash + " seed=" + std::to_string(seed);
}

namespace {

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Data lines with their 1-based line numbers; comments and blanks skipped,
// the first remaining line must equal the expected header.
struct CsvRows {
  std::vector<std::string> header;
  std::vector<std::pair<int, std::vector<std::string>>> rows;
};

CsvRows read_csv(std::istream& in) {
  CsvRows csv;
  std::string line;
  int no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++no;
    const auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (!have_header) {
      csv.header = split(t);
      have_header = true;
      continue;
    }
    csv.rows.emplace_back(no, split(t));
  }
  if (!have_header) throw DataError("missing CSV header");
  return csv;
}

void expect_header(const CsvRows& csv, const std::vector<std::string>& want) {
  if (csv.header != want) {
    std::string w;
    for (const auto& h : want) w += (w.empty() ? "" : ",") + h;
    throw DataError("expected CSV header '" + w + "'");
  }
}

double parse_double(const std::string& s, int line, const char* field) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
    throw DataError("line " + std::to_string(line) + ": invalid " + field + " '" + s + "'");
  return v;
}

std::size_t parse_index(const std::string& s, int line, const char* field) {
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || v < 0)
    throw DataError("line " + std::to_string(line) + ": invalid " + field + " '" + s + "'");
  return static_cast<std::size_t>(v);
}

void check_width(const std::vector<std::string>& row, std::size_t n, int line) {
  if (row.size() != n)
    throw DataError("line " + std::to_string(line) + ": expected " + std::to_string(n) +
                    " fields, got " + std::to_string(row.size()));
}

std::unordered_map<std::string, int> label_index(const TemporalNetwork& net) {
  std::unordered_map<std::string, int> idx;
  for (int i = 0; i < net.n_nodes(); ++i) idx[node_label(net, i)] = i;
  return idx;
}

int resolve(const std::unordered_map<std::string, int>& idx, const std::string& id, int line) {
  auto it = idx.find(id);
  if (it == idx.end())
    throw DataError("line " + std::to_string(line) + ": unknown node '" + id + "'");
  return it->second;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return in;
}

}  // namespace

std::string node_label(const TemporalNetwork& net, int i) {
  const auto& labels = net.node_labels();
  return labels.empty() ? std::to_string(i) : labels.at(i);
}

namespace {

bool is_index(const std::string& s) {
  return !s.empty() && s.size() < 10 &&
         std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

}  // namespace

TemporalNetwork read_edge_list(std::istream& in, std::size_t n_times, int n_nodes) {
  const auto csv = read_csv(in);
  expect_header(csv, {"t", "src", "dst", "weight"});
  bool numeric = true;
  for (const auto& [line, row] : csv.rows) {
    check_width(row, 4, line);
    numeric = numeric && is_index(row[1]) && is_index(row[2]);
  }
  std::unordered_map<std::string, int> idx;
  std::vector<std::string> labels;
  int n = 0;
  auto id_of = [&](const std::string& s) {
    if (numeric) {
      const int v = std::stoi(s);
      n = std::max(n, v + 1);
      return v;
    }
    auto [it, fresh] = idx.try_emplace(s, static_cast<int>(labels.size()));
    if (fresh) labels.push_back(s);
    return it->second;
  };
  struct Raw {
    std::size_t t;
    int src, dst;
    double w;
  };
  std::vector<Raw> raw;
  std::size_t T = n_times;
  for (const auto& [line, row] : csv.rows) {
    const auto t = parse_index(row[0], line, "t");
    const double w = parse_double(row[3], line, "weight");
    if (!(w > 0.0))
      throw DataError("line " + std::to_string(line) + ": weights must be > 0");
    if (row[1] == row[2])
      throw DataError("line " + std::to_string(line) + ": self-loop on node '" + row[1] + "'");
    const int s = id_of(row[1]);
    const int d = id_of(row[2]);
    raw.push_back({t, s, d, w});
    T = std::max(T, t + 1);
  }
  if (!numeric) {
    n = static_cast<int>(labels.size());
    if (n_nodes > n)
      for (int k = 0; n + k < n_nodes; ++k) labels.push_back("isolated_" + std::to_string(k));
  }
  n = std::max(n, n_nodes);
  if (!numeric) n = static_cast<int>(labels.size());
  std::vector<std::vector<Edge>> edges(T);
  for (const auto& r : raw) edges[r.t].push_back({r.src, r.dst, r.w});
  std::vector<Snapshot> snaps;
  snaps.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    try {
      snaps.emplace_back(n, std::move(edges[t]));
    } catch (const std::invalid_argument& e) {
      throw DataError("snapshot " + std::to_string(t) + ": " + e.what());
    }
  }
  return TemporalNetwork(n, std::move(snaps), std::move(labels));
}

TemporalNetwork read_edge_list_file(const std::string& path, std::size_t n_times, int n_nodes) {
  auto in = open_in(path);
  return read_edge_list(in, n_times, n_nodes);
}

void write_edge_list(std::ostream& out, const TemporalNetwork& net, const FileStamp& stamp) {
  out << stamp.line() << "\nt,src,dst,weight\n";
  for (std::size_t t = 0; t < net.n_times(); ++t)
    for (const auto& e : net.at(t).edges())
      out << t << ',' << node_label(net, e.src) << ',' << node_label(net, e.dst) << ','
          << fmt(e.weight) << '\n';
}

CovariateSet read_covariate(std::istream& in, const std::string& name, const TemporalNetwork& net) {
  const auto csv = read_csv(in);
  const std::size_t T = net.n_times();
  if (csv.header == std::vector<std::string>{"t", "value"}) {
    std::vector<double> x(T, 0.0);
    std::vector<char> seen(T, 0);
    for (const auto& [line, row] : csv.rows) {
      check_width(row, 2, line);
      const auto t = parse_index(row[0], line, "t");
      if (t >= T) throw DataError("line " + std::to_string(line) + ": t beyond the network");
      x[t] = parse_double(row[1], line, "value");
      seen[t] = 1;
    }
    for (std::size_t t = 0; t < T; ++t)
      if (!seen[t]) throw DataError("covariate '" + name + "' has no value at t=" + std::to_string(t));
    return CovariateSet::scalar(name, std::move(x));
  }
  expect_header(csv, {"t", "src", "dst", "value"});
  const int n = net.n_nodes();
  const auto idx = label_index(net);
  std::vector<std::vector<double>> m(T, std::vector<double>(static_cast<std::size_t>(n) * n, 0.0));
  for (const auto& [line, row] : csv.rows) {
    check_width(row, 4, line);
    const auto t = parse_index(row[0], line, "t");
    if (t >= T) throw DataError("line " + std::to_string(line) + ": t beyond the network");
    const int i = resolve(idx, row[1], line);
    const int j = resolve(idx, row[2], line);
    m[t][static_cast<std::size_t>(i) * n + j] = parse_double(row[3], line, "value");
  }
  return CovariateSet::per_link(name, n, std::move(m));
}

CovariateSet read_covariate_file(const std::string& path, const std::string& name,
                                 const TemporalNetwork& net) {
  auto in = open_in(path);
  return read_covariate(in, name, net);
}

void write_covariate(std::ostream& out, const CovariateSet& cov, const TemporalNetwork& net,
                     const FileStamp& stamp) {
  out << stamp.line() << '\n';
  if (cov.kind() == CovariateKind::scalar) {
    out << "t,value\n";
    for (std::size_t t = 0; t < cov.n_times(); ++t) out << t << ',' << fmt(cov.value(t, 0, 0)) << '\n';
    return;
  }
  out << "t,src,dst,value\n";
  if (cov.is_none()) return;
  const int n = cov.n_nodes();
  for (std::size_t t = 0; t < cov.n_times(); ++t)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double v = cov.value(t, i, j);
        if (i != j && v != 0.0)
          out << t << ',' << node_label(net, i) << ',' << node_label(net, j) << ',' << fmt(v) << '\n';
      }
}

void write_margins(std::ostream& out, const Margins& m, const TemporalNetwork& net,
                   const FileStamp& stamp) {
  out << stamp.line() << "\nt,node,deg_in,deg_out,str_in,str_out\n";
  for (std::size_t t = 0; t < m.n_times(); ++t)
    for (int i = 0; i < m.n_nodes(); ++i)
      out << t << ',' << node_label(net, i) << ',' << m.deg_in[t][i] << ',' << m.deg_out[t][i]
          << ',' << fmt(m.str_in[t][i]) << ',' << fmt(m.str_out[t][i]) << '\n';
}

Margins read_margins(std::istream& in, std::size_t n_times, int n_nodes) {
  const auto csv = read_csv(in);
  expect_header(csv, {"t", "node", "deg_in", "deg_out", "str_in", "str_out"});
  Margins m;
  m.deg_in.assign(n_times, std::vector<int>(n_nodes, 0));
  m.deg_out = m.deg_in;
  m.str_in.assign(n_times, std::vector<double>(n_nodes, 0.0));
  m.str_out = m.str_in;
  std::map<std::string, int> idx;
  for (const auto& [line, row] : csv.rows) {
    check_width(row, 6, line);
    const auto t = parse_index(row[0], line, "t");
    if (t >= n_times) throw DataError("line " + std::to_string(line) + ": t out of range");
    auto [it, fresh] = idx.try_emplace(row[1], static_cast<int>(idx.size()));
    if (it->second >= n_nodes) throw DataError("line " + std::to_string(line) + ": too many nodes");
    const int i = it->second;
    m.deg_in[t][i] = static_cast<int>(parse_index(row[2], line, "deg_in"));
    m.deg_out[t][i] = static_cast<int>(parse_index(row[3], line, "deg_out"));
    m.str_in[t][i] = parse_double(row[4], line, "str_in");
    m.str_out[t][i] = parse_double(row[5], line, "str_out");
  }
  try {
    m.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
  return m;
}

void write_fitness_path(std::ostream& out, const FitnessPath& path, const TemporalNetwork& net,
                        const FileStamp& stamp, std::size_t t_offset) {
  out << stamp.line() << "\nt,node,bin_in,bin_out,w_in,w_out\n";
  for (std::size_t t = 0; t < path.states.size(); ++t) {
    const auto& f = path.states[t];
    for (int i = 0; i < f.n_nodes(); ++i)
      out << t + t_offset << ',' << node_label(net, i) << ',' << fmt(f.bin_in[i]) << ','
          << fmt(f.bin_out[i]) << ',' << fmt(f.w_in[i]) << ',' << fmt(f.w_out[i]) << '\n';
  }
}

void write_forecasts(std::ostream& out, const std::vector<ForecastRecord>& records,
                     const TemporalNetwork& net, const FileStamp& stamp) {
  out << stamp.line() << "\nt,src,dst,prob,cond_mean,observed_weight\n";
  for (const auto& r : records)
    for (const auto& e : r.entries)
      out << r.t << ',' << node_label(net, e.src) << ',' << node_label(net, e.dst) << ','
          << fmt(e.prob) << ',' << fmt(e.cond_mean) << ',' << fmt(e.observed) << '\n';
}

std::vector<ForecastRecord> read_forecasts(std::istream& in, const TemporalNetwork& net) {
  const auto csv = read_csv(in);
  expect_header(csv, {"t", "src", "dst", "prob", "cond_mean", "observed_weight"});
  const auto idx = label_index(net);
  std::vector<ForecastRecord> out;
  for (const auto& [line, row] : csv.rows) {
    check_width(row, 6, line);
    const auto t = parse_index(row[0], line, "t");
    if (out.empty() || out.back().t != t) {
      out.emplace_back();
      out.back().t = t;
      out.back().has_observation = true;
    }
    ForecastEntry e;
    e.src = resolve(idx, row[1], line);
    e.dst = resolve(idx, row[2], line);
    e.prob = parse_double(row[3], line, "prob");
    e.cond_mean = parse_double(row[4], line, "cond_mean");
    e.observed = parse_double(row[5], line, "observed_weight");
    if (!(e.prob >= 0.0 && e.prob <= 1.0))
      throw DataError("line " + std::to_string(line) + ": prob outside [0,1]");
    if (!(e.cond_mean > 0.0))
      throw DataError("line " + std::to_string(line) + ": cond_mean must be > 0");
    out.back().entries.push_back(e);
  }
  return out;
}

void write_metrics(std::ostream& out, const std::vector<MetricRow>& rows, const FileStamp& stamp) {
  out << stamp.line() << "\nmodel,metric,split,value\n";
  for (const auto& r : rows)
    out << r.model << ',' << r.metric << ',' << r.split << ',' << fmt(r.value) << '\n';
}

void write_experiment_rows(std::ostream& out, const ExperimentReport& report,
                           const FileStamp& stamp) {
  out << stamp.line() << "\nexperiment,dgp,filter,metric,replication,value\n";
  for (const auto& r : report.rows)
    out << r.experiment << ',' << r.dgp << ',' << r.filter << ',' << r.metric << ','
        << r.replication << ',' << fmt(r.value) << '\n';
}

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string experiment_summary_json(const ExperimentReport& report, const FileStamp& stamp) {
  json j;
  j["tool"] = "sdnet " SDNET_VERSION;
  j["config_hash"] = stamp.config_hash;
  j["seed"] = stamp.seed;
  j["experiment"] = report.name;
  j["replications"] = report.n_reps;
  j["seeds"] = report.seeds;
  j["failures"] = report.failures;
  json means = json::array();
  std::map<std::tuple<std::string, std::string, std::string>, std::vector<double>> groups;
  std::vector<std::tuple<std::string, std::string, std::string>> order;
  for (const auto& r : report.rows) {
    auto key = std::make_tuple(r.dgp, r.filter, r.metric);
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(r.value);
  }
  for (const auto& key : order) {
    const auto& v = groups[key];
    double s = 0.0;
    for (double x : v) s += x;
    means.push_back({{"dgp", std::get<0>(key)},
                     {"filter", std::get<1>(key)},
                     {"metric", std::get<2>(key)},
                     {"mean", number(s / static_cast<double>(v.size()))},
                     {"n", v.size()}});
  }
  j["means"] = means;
  return j.dump(2) + "\n";
}

std::string fit_result_json(const FitResult& fit, const FileStamp& stamp) {
  json j;
  j["tool"] = "sdnet " SDNET_VERSION;
  j["config_hash"] = stamp.config_hash;
  j["seed"] = stamp.seed;
  j["model"] = fit.model;
  j["family"] = to_string(fit.statics.family);
  j["tie_mode"] = to_string(fit.statics.tie_mode);
  j["parts"] = to_string(fit.statics.parts);
  j["scaling_power"] = fit.statics.scaling_power;
  j["curvature"] = to_string(fit.statics.curvature);
  j["loglik"] = number(fit.loglik);
  j["loglik_bin"] = number(fit.loglik_bin);
  j["loglik_w"] = number(fit.loglik_w);
  j["n_params"] = fit.n_params;
  j["n_params_bin"] = fit.n_params_bin;
  j["n_params_w"] = fit.n_params_w;
  j["n_obs_bin"] = fit.n_obs_bin;
  j["n_obs_w"] = fit.n_obs_w;
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  json est = json::object(), se = json::object();
  for (const auto& [k, v] : fit.estimates) est[k] = number(v);
  for (const auto& [k, v] : fit.std_errors) se[k] = number(v);
  j["estimates"] = est;
  j["std_errors"] = se;
  j["statics"] = {{"w", fit.statics.w},
                  {"b", fit.statics.b},
                  {"a", fit.statics.a},
                  {"beta_bin", fit.statics.beta_bin},
                  {"beta_w", fit.statics.beta_w},
                  {"sigma", number(fit.statics.sigma)}};
  if (fit.fitness.n_nodes() > 0)
    j["fitness"] = {{"bin_in", fit.fitness.bin_in},
                    {"bin_out", fit.fitness.bin_out},
                    {"w_in", fit.fitness.w_in},
                    {"w_out", fit.fitness.w_out}};
  j["warnings"] = fit.warnings;
  return j.dump(2) + "\n";
}

FitResult read_fit_result(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
    FitResult fit;
    fit.model = j.at("model").get<std::string>();
    auto& st = fit.statics;
    st.family = parse_family(j.at("family").get<std::string>());
    st.tie_mode = parse_tie_mode(j.at("tie_mode").get<std::string>());
    st.parts = parse_parts(j.value("parts", std::string("both")));
    st.scaling_power = j.value("scaling_power", 1.0);
    st.curvature = parse_curvature(j.value("curvature", std::string("expected")));
    const auto& s = j.at("statics");
    st.w = s.at("w").get<std::vector<double>>();
    st.b = s.at("b").get<std::vector<double>>();
    st.a = s.at("a").get<std::vector<double>>();
    st.beta_bin = s.at("beta_bin").get<std::vector<double>>();
    st.beta_w = s.at("beta_w").get<std::vector<double>>();
    st.sigma = s.at("sigma").is_null() ? 1.0 : s.at("sigma").get<double>();
    if (j.contains("fitness")) {
      const auto& f = j.at("fitness");
      fit.fitness.bin_in = f.at("bin_in").get<std::vector<double>>();
      fit.fitness.bin_out = f.at("bin_out").get<std::vector<double>>();
      fit.fitness.w_in = f.at("w_in").get<std::vector<double>>();
      fit.fitness.w_out = f.at("w_out").get<std::vector<double>>();
    }
    return fit;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed fit file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("malformed fit file: ") + e.what());
  }
}

}  // namespace sdnet
