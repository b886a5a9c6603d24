#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sdnet/eval.hpp"
#include "sdnet/io.hpp"
#include "sdnet/rolling.hpp"

namespace py = pybind11;
using namespace sdnet;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

TemporalNetwork from_dense(const Array& y) {
  if (y.ndim() != 3 || y.shape(1) != y.shape(2))
    throw std::invalid_argument("expected a T x N x N array");
  const auto T = static_cast<std::size_t>(y.shape(0));
  const int n = static_cast<int>(y.shape(1));
  auto v = y.unchecked<3>();
  std::vector<Snapshot> snaps;
  snaps.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<Edge> edges;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double w = v(t, i, j);
        if (w < 0.0) throw std::invalid_argument("weights must be >= 0");
        if (w > 0.0) {
          if (i == j) throw std::invalid_argument("self-loop at node " + std::to_string(i));
          edges.push_back({i, j, w});
        }
      }
    snaps.emplace_back(n, std::move(edges));
  }
  return TemporalNetwork(n, std::move(snaps));
}

Array to_dense(const TemporalNetwork& net) {
  const auto T = static_cast<py::ssize_t>(net.n_times());
  const py::ssize_t n = net.n_nodes();
  Array out({T, n, n});
  auto v = out.mutable_unchecked<3>();
  for (py::ssize_t t = 0; t < T; ++t)
    for (py::ssize_t i = 0; i < n; ++i)
      for (py::ssize_t j = 0; j < n; ++j) v(t, i, j) = 0.0;
  for (py::ssize_t t = 0; t < T; ++t)
    for (const auto& e : net.at(static_cast<std::size_t>(t)).edges()) v(t, e.src, e.dst) = e.weight;
  return out;
}

// None, a length-T vector (scalar covariate) or a T x N x N array.
CovariateSet to_covariate(const py::object& obj, const std::string& name, std::size_t T) {
  if (obj.is_none()) return CovariateSet::none(T);
  const auto x = obj.cast<Array>();
  if (x.ndim() == 1) {
    if (static_cast<std::size_t>(x.shape(0)) != T)
      throw std::invalid_argument("covariate '" + name + "' is not aligned with the network");
    return CovariateSet::scalar(name, std::vector<double>(x.data(), x.data() + x.shape(0)));
  }
  if (x.ndim() != 3 || static_cast<std::size_t>(x.shape(0)) != T || x.shape(1) != x.shape(2))
    throw std::invalid_argument("covariate '" + name + "' must be length T or T x N x N");
  const auto n = static_cast<std::size_t>(x.shape(1));
  std::vector<std::vector<double>> m(T);
  for (std::size_t t = 0; t < T; ++t) m[t].assign(x.data() + t * n * n, x.data() + (t + 1) * n * n);
  return CovariateSet::per_link(name, static_cast<int>(n), std::move(m));
}

py::object from_covariate(const CovariateSet& c) {
  if (c.is_none()) return py::none();
  if (c.kind() == CovariateKind::scalar) return py::cast(c.scalar_values());
  const auto T = static_cast<py::ssize_t>(c.n_times());
  const py::ssize_t n = c.n_nodes();
  Array out({T, n, n});
  auto v = out.mutable_unchecked<3>();
  for (py::ssize_t t = 0; t < T; ++t)
    for (py::ssize_t i = 0; i < n; ++i)
      for (py::ssize_t j = 0; j < n; ++j)
        v(t, i, j) = c.value(static_cast<std::size_t>(t), static_cast<int>(i), static_cast<int>(j));
  return out;
}

ModelCovariates covariates(const TemporalNetwork& net, const py::object& xb, const py::object& xw) {
  return {to_covariate(xb, "x_bin", net.n_times()), to_covariate(xw, "x_w", net.n_times())};
}

// T x 4 x N array in the group order bin_in, bin_out, w_in, w_out.
Array path_array(const std::vector<FitnessState>& states) {
  const auto T = static_cast<py::ssize_t>(states.size());
  const py::ssize_t n = states.empty() ? 0 : states[0].n_nodes();
  Array out({T, py::ssize_t{4}, n});
  auto v = out.mutable_unchecked<3>();
  for (py::ssize_t t = 0; t < T; ++t)
    for (int g = 0; g < 4; ++g)
      for (py::ssize_t i = 0; i < n; ++i) v(t, g, i) = states[t].group(g)[i];
  return out;
}

py::dict fit_dict(const FitResult& f) {
  py::dict d;
  d["model"] = f.model;
  d["loglik"] = f.loglik;
  d["loglik_bin"] = f.loglik_bin;
  d["loglik_w"] = f.loglik_w;
  d["n_params"] = f.n_params;
  d["bic_bin"] = f.n_obs_bin > 0 ? bic(f.loglik_bin, f.n_params_bin, f.n_obs_bin) : 0.0;
  d["bic_w"] = f.n_obs_w > 0 ? bic(f.loglik_w, f.n_params_w, f.n_obs_w) : 0.0;
  d["estimates"] = f.estimates;
  d["std_errors"] = f.std_errors;
  d["converged"] = f.converged;
  d["warnings"] = f.warnings;
  d["path"] = path_array(f.path.states);
  d["fitness"] = path_array({f.fitness});
  return d;
}

py::list records_list(const std::vector<ForecastRecord>& recs) {
  py::list out;
  for (const auto& r : recs) {
    const auto m = static_cast<py::ssize_t>(r.entries.size());
    Array a({m, py::ssize_t{5}});
    auto v = a.mutable_unchecked<2>();
    for (py::ssize_t k = 0; k < m; ++k) {
      const auto& e = r.entries[k];
      v(k, 0) = e.src;
      v(k, 1) = e.dst;
      v(k, 2) = e.prob;
      v(k, 3) = e.cond_mean;
      v(k, 4) = e.observed;
    }
    out.append(py::make_tuple(r.t, a));
  }
  return out;
}

std::vector<ForecastRecord> to_records(const py::list& recs) {
  std::vector<ForecastRecord> out;
  for (const auto& item : recs) {
    const auto tup = item.cast<py::tuple>();
    ForecastRecord r;
    r.t = tup[0].cast<std::size_t>();
    r.has_observation = true;
    const auto a = tup[1].cast<Array>();
    if (a.ndim() != 2 || a.shape(1) != 5)
      throw std::invalid_argument("forecast entries must be an m x 5 array");
    auto v = a.unchecked<2>();
    for (py::ssize_t k = 0; k < a.shape(0); ++k)
      r.entries.push_back({static_cast<int>(v(k, 0)), static_cast<int>(v(k, 1)), v(k, 2), v(k, 3),
                           v(k, 4)});
    out.push_back(std::move(r));
  }
  return out;
}

SdFitConfig sd_config(const std::string& family, const std::string& tie_mode, bool std_errors) {
  SdFitConfig c;
  c.family = parse_family(family);
  c.tie_mode = parse_tie_mode(tie_mode);
  c.std_errors = std_errors;
  return c;
}

py::dict report_dict(const ExperimentReport& r) {
  py::list rows;
  for (const auto& row : r.rows)
    rows.append(py::dict(py::arg("dgp") = row.dgp, py::arg("filter") = row.filter,
                         py::arg("metric") = row.metric, py::arg("replication") = row.replication,
                         py::arg("value") = row.value));
  py::dict d;
  d["name"] = r.name;
  d["rows"] = rows;
  d["failures"] = r.failures;
  d["table"] = r.table();
  return d;
}

}  // namespace

PYBIND11_MODULE(_sdnet, m) {
  m.doc() = "Score-driven fitness models for weighted temporal networks";
  m.attr("__version__") = SDNET_VERSION;

  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);

  m.def(
      "simulate",
      [](const std::string& kind, int n_nodes, std::size_t n_times, std::uint64_t seed,
         const std::string& family, double sigma, double beta_bin, double beta_w) {
        DgpSpec d;
        d.kind = parse_dgp_kind(kind);
        d.n_nodes = n_nodes;
        d.n_times = n_times;
        d.seed = seed;
        d.family = parse_family(family);
        d.sigma = sigma;
        d.beta_bin = beta_bin;
        d.beta_w = beta_w;
        const auto sim = simulate(d);
        py::dict out;
        out["weights"] = to_dense(sim.net);
        out["truth"] = path_array(sim.truth.states);
        out["x_bin"] = from_covariate(sim.cov.binary);
        out["x_w"] = from_covariate(sim.cov.weight);
        return out;
      },
      py::arg("kind") = "ar1-fitness", py::arg("n_nodes") = 30, py::arg("n_times") = 150,
      py::arg("seed") = 1, py::arg("family") = "gamma", py::arg("sigma") = 2.0,
      py::arg("beta_bin") = 0.0, py::arg("beta_w") = 0.0,
      "Simulates a DGP; returns weights (T x N x N), truth (T x 4 x N) and covariates.");

  m.def("identify", [](const Array& f) {
    if (f.ndim() != 2 || f.shape(0) != 4) throw std::invalid_argument("expected a 4 x N array");
    std::vector<FitnessState> s(1, FitnessState::from_flat({f.data(), static_cast<std::size_t>(f.size())}));
    s[0] = identify(s[0]);
    auto out = path_array(s);
    return out.reshape({py::ssize_t{4}, f.shape(1)});
  });

  m.def(
      "fit_sd",
      [](const Array& weights, const py::object& x_bin, const py::object& x_w,
         const std::string& family, const std::string& tie_mode, bool std_errors) {
        const auto net = from_dense(weights);
        const auto cov = covariates(net, x_bin, x_w);
        const auto cfg = sd_config(family, tie_mode, std_errors);
        FitResult fit;
        {
          py::gil_scoped_release release;
          fit = fit_sd(net, cov, cfg);
        }
        return fit_dict(fit);
      },
      py::arg("weights"), py::arg("x_bin") = py::none(), py::arg("x_w") = py::none(),
      py::arg("family") = "gamma", py::arg("tie_mode") = "per-group", py::arg("std_errors") = true,
      "Maximum likelihood fit of the score-driven model.");

  m.def(
      "fit_constant",
      [](const Array& weights, const py::object& x_bin, const py::object& x_w,
         const std::string& family) {
        const auto net = from_dense(weights);
        StaticFitConfig c;
        c.family = parse_family(family);
        return fit_dict(fit_constant(net, covariates(net, x_bin, x_w), c));
      },
      py::arg("weights"), py::arg("x_bin") = py::none(), py::arg("x_w") = py::none(),
      py::arg("family") = "gamma");

  m.def(
      "fit_nofitness",
      [](const Array& weights, const py::object& x_bin, const py::object& x_w,
         const std::string& family, bool intercept) {
        const auto net = from_dense(weights);
        StaticFitConfig c;
        c.family = parse_family(family);
        c.intercept = intercept;
        return fit_dict(fit_nofitness(net, covariates(net, x_bin, x_w), c));
      },
      py::arg("weights"), py::arg("x_bin") = py::none(), py::arg("x_w") = py::none(),
      py::arg("family") = "gamma", py::arg("intercept") = true);

  m.def(
      "fit_snapshot_sequence",
      [](const Array& weights, const std::string& family) {
        const auto net = from_dense(weights);
        StaticFitConfig c;
        c.family = parse_family(family);
        c.estimate_beta = false;
        const auto seq = fit_snapshot_sequence(net, {}, c);
        py::dict d;
        d["path"] = path_array(seq.path.states);
        d["carried"] = seq.carried;
        d["saturated"] = seq.saturated;
        return d;
      },
      py::arg("weights"), py::arg("family") = "gamma");

  m.def(
      "rolling_forecast",
      [](const Array& weights, const std::vector<std::string>& models, std::size_t window,
         std::size_t refit_every, const std::string& family, const py::object& x_bin,
         const py::object& x_w, int threads) {
        const auto net = from_dense(weights);
        RollingConfig c;
        c.window = window;
        c.refit_every = refit_every;
        c.family = parse_family(family);
        c.sd.std_errors = false;
        c.threads = threads;
        c.models.clear();
        for (const auto& s : models) c.models.push_back(parse_forecast_model(s));
        const auto cov = covariates(net, x_bin, x_w);
        RollingResult res;
        {
          py::gil_scoped_release release;
          res = rolling_forecast(net, cov, c);
        }
        py::dict out;
        for (const auto& [model, recs] : res.forecasts) out[to_string(model).c_str()] = records_list(recs);
        return out;
      },
      py::arg("weights"), py::arg("models") = std::vector<std::string>{"sd", "ss-ar1"},
      py::arg("window") = 100, py::arg("refit_every") = 1, py::arg("family") = "gamma",
      py::arg("x_bin") = py::none(), py::arg("x_w") = py::none(), py::arg("threads") = 1,
      "One-step-ahead rolling forecasts; each record is (t, m x 5 array of src, dst, prob, "
      "cond_mean, observed).");

  m.def("mse_log", [](const py::list& r) { return mse_log(to_records(r)); });
  m.def("mad_log", [](const py::list& r) { return mad_log(to_records(r)); });
  m.def("forecast_auc", [](const py::list& r, bool per_time) { return forecast_auc(to_records(r), per_time); },
        py::arg("records"), py::arg("per_time") = false);
  m.def("auc", &auc, py::arg("labels"), py::arg("scores"));
  m.def("bic", &bic, py::arg("loglik"), py::arg("n_params"), py::arg("n_obs"));
  m.def(
      "diebold_mariano",
      [](const std::vector<double>& l1, const std::vector<double>& l2, int horizon) {
        const auto r = diebold_mariano(l1, l2, horizon);
        return py::make_tuple(r.stat, r.p_value);
      },
      py::arg("loss1"), py::arg("loss2"), py::arg("horizon") = 1);
  m.def("spearman", &spearman, py::arg("x"), py::arg("y"));
  m.def(
      "ks_two_sample",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        const auto r = ks_two_sample(a, b);
        return py::make_tuple(r.stat, r.p_value);
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "run_experiment",
      [](int which, int n_reps, std::uint64_t seed, int threads) {
        if (which < 1 || which > 3) throw std::invalid_argument("experiment must be 1, 2 or 3");
        ExperimentConfig c = which == 1   ? experiment1_defaults()
                             : which == 2 ? experiment2_defaults()
                                          : experiment3_defaults();
        c.n_reps = n_reps;
        c.dgp.seed = seed;
        c.threads = threads;
        ExperimentReport r;
        {
          py::gil_scoped_release release;
          r = which == 1 ? run_experiment1(c) : which == 2 ? run_experiment2(c) : run_experiment3(c);
        }
        return report_dict(r);
      },
      py::arg("which"), py::arg("n_reps") = 10, py::arg("seed") = 1, py::arg("threads") = 1);
}
