#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdnet/estimate.hpp"
#include "sdnet/simulate.hpp"

namespace sdnet {

/// Malformed or inconsistent input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& data);
std::string hex64(std::uint64_t v);

/// Leading comment line of every output file.
struct FileStamp {
  std::string config_hash = "0000000000000000";
  std::uint64_t seed = 0;

  std::string line() const;
};

/// Edge list CSV with header t,src,dst,weight; lines starting with '#' are
/// skipped. When every node id is a non-negative integer the ids are the
/// node indices; otherwise ids are arbitrary strings mapped to dense indices
/// in order of first appearance and kept as labels. n_times and n_nodes,
/// when given, add empty trailing snapshots and isolated nodes. Throws
/// DataError naming the offending line.
TemporalNetwork read_edge_list(std::istream& in, std::size_t n_times = 0, int n_nodes = 0);
TemporalNetwork read_edge_list_file(const std::string& path, std::size_t n_times = 0,
                                    int n_nodes = 0);
void write_edge_list(std::ostream& out, const TemporalNetwork& net, const FileStamp& stamp);

/// Scalar covariates use the header t,value; per-link ones t,src,dst,value
/// with node ids resolved through the network labels. Missing per-link
/// entries are 0.
CovariateSet read_covariate(std::istream& in, const std::string& name, const TemporalNetwork& net);
CovariateSet read_covariate_file(const std::string& path, const std::string& name,
                                 const TemporalNetwork& net);
void write_covariate(std::ostream& out, const CovariateSet& cov, const TemporalNetwork& net,
                     const FileStamp& stamp);

/// t,node,deg_in,deg_out,str_in,str_out
void write_margins(std::ostream& out, const Margins& m, const TemporalNetwork& net,
                   const FileStamp& stamp);
Margins read_margins(std::istream& in, std::size_t n_times, int n_nodes);

/// t,node,bin_in,bin_out,w_in,w_out
void write_fitness_path(std::ostream& out, const FitnessPath& path, const TemporalNetwork& net,
                        const FileStamp& stamp, std::size_t t_offset = 0);

/// t,src,dst,prob,cond_mean,observed_weight
void write_forecasts(std::ostream& out, const std::vector<ForecastRecord>& records,
                     const TemporalNetwork& net, const FileStamp& stamp);
/// Reads forecast CSV rows back; node ids are resolved through net labels.
std::vector<ForecastRecord> read_forecasts(std::istream& in, const TemporalNetwork& net);

struct MetricRow {
  std::string model;
  std::string metric;
  std::string split;
  double value = 0.0;
};

/// model,metric,split,value
void write_metrics(std::ostream& out, const std::vector<MetricRow>& rows, const FileStamp& stamp);

/// experiment,dgp,filter,metric,replication,value
void write_experiment_rows(std::ostream& out, const ExperimentReport& report,
                           const FileStamp& stamp);
std::string experiment_summary_json(const ExperimentReport& report, const FileStamp& stamp);

/// The "fitness" entry holds f0 for score-driven fits and the time-constant
/// fitness of static ones.
std::string fit_result_json(const FitResult& fit, const FileStamp& stamp);
/// Restores model, statics and fitness written by fit_result_json.
FitResult read_fit_result(std::istream& in);

/// Label of node i, or its index when the network carries no labels.
std::string node_label(const TemporalNetwork& net, int i);

}  // namespace sdnet
