#include "sdnet/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sdnet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double safe_eval(const Objective& f, const std::vector<double>& x) {
  try {
    const double v = f(x);
    return std::isfinite(v) ? v : kInf;
  } catch (const std::runtime_error&) {
    return kInf;
  }
}

double step_size(double x, double step) { return step * std::max(1.0, std::abs(x)); }

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

std::vector<double> fd_gradient(const Objective& f, const std::vector<double>& x, double step) {
  std::vector<double> g(x.size());
  auto xp = x;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double h = step_size(x[k], step);
    xp[k] = x[k] + h;
    const double up = f(xp);
    xp[k] = x[k] - h;
    const double down = f(xp);
    xp[k] = x[k];
    g[k] = (up - down) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd fd_jacobian(const VectorObjective& f, const std::vector<double>& x, double step) {
  Eigen::MatrixXd jac;
  auto xp = x;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double h = step_size(x[k], step);
    xp[k] = x[k] + h;
    const auto up = f(xp);
    xp[k] = x[k] - h;
    const auto down = f(xp);
    xp[k] = x[k];
    if (up.size() != down.size()) throw std::runtime_error("jacobian: output size changed");
    if (jac.size() == 0) jac.resize(static_cast<Eigen::Index>(up.size()), static_cast<Eigen::Index>(x.size()));
    for (std::size_t r = 0; r < up.size(); ++r) jac(r, k) = (up[r] - down[r]) / (2.0 * h);
  }
  return jac;
}

OptimResult minimize_bfgs(const Objective& f, std::vector<double> x0, const OptimOptions& opts) {
  const auto n = static_cast<Eigen::Index>(x0.size());
  OptimResult res;
  res.x = x0;
  res.value = safe_eval(f, x0);
  if (!std::isfinite(res.value)) {
    res.message = "objective not finite at the starting point";
    return res;
  }
  if (n == 0) {
    res.converged = true;
    res.message = "no free parameters";
    return res;
  }

  auto gradient = [&](const std::vector<double>& x) {
    const Objective guarded = [&](const std::vector<double>& y) { return safe_eval(f, y); };
    return to_eigen(fd_gradient(guarded, x, opts.fd_step));
  };

  Eigen::VectorXd x = to_eigen(x0);
  Eigen::VectorXd g = gradient(res.x);
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  double fx = res.value;
  bool fresh_h = true;

  for (int iter = 1; iter <= opts.max_iters; ++iter) {
    res.iterations = iter;
    if (!g.allFinite()) {
      res.message = "non-finite gradient";
      break;
    }
    if (g.cwiseAbs().maxCoeff() < opts.grad_tol) {
      res.converged = true;
      res.message = "gradient tolerance reached";
      break;
    }
    Eigen::VectorXd d = -H * g;
    if (d.dot(g) >= 0.0) {
      H.setIdentity();
      fresh_h = true;
      d = -g;
    }
    if (fresh_h) d /= std::max(1.0, g.norm());
    const double dmax = d.cwiseAbs().maxCoeff();
    if (dmax > opts.max_step) d *= opts.max_step / dmax;

    double lambda = 1.0;
    double f_new = kInf;
    Eigen::VectorXd x_new;
    const double slope = g.dot(d);
    for (int k = 0; k < 40; ++k) {
      x_new = x + lambda * d;
      f_new = safe_eval(f, to_std(x_new));
      if (f_new <= fx + 1e-4 * lambda * slope) break;
      lambda *= 0.5;
    }
    if (!(f_new <= fx + 1e-4 * lambda * slope)) {
      if (!fresh_h) {
        H.setIdentity();
        fresh_h = true;
        continue;
      }
      res.message = "line search failed";
      res.converged = g.cwiseAbs().maxCoeff() < 1e3 * opts.grad_tol;
      break;
    }

    const Eigen::VectorXd g_new = gradient(to_std(x_new));
    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    const double rel_change = std::abs(fx - f_new) / std::max(1.0, std::abs(fx));
    x = x_new;
    g = g_new;
    fx = f_new;

    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (fresh_h) H *= sy / y.squaredNorm();
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) +
          rho * s * s.transpose();
      fresh_h = false;
    }

    if (rel_change < opts.rel_tol) {
      res.converged = true;
      res.message = "relative change tolerance reached";
      break;
    }
    if (iter == opts.max_iters) res.message = "iteration limit reached";
  }

  res.x = to_std(x);
  res.value = fx;
  res.gradient = to_std(g);
  return res;
}

}  // namespace sdnet
