#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sdnet {

using Objective = std::function<double(const std::vector<double>&)>;
using VectorObjective = std::function<std::vector<double>(const std::vector<double>&)>;

struct OptimOptions {
  int max_iters = 2000;
  double grad_tol = 1e-5;
  double rel_tol = 1e-9;
  double fd_step = 1e-5;
  /// Largest allowed step (infinity norm) in the free parameters.
  double max_step = 2.0;
};

struct OptimResult {
  std::vector<double> x;
  double value = 0.0;
  std::vector<double> gradient;
  int iterations = 0;
  bool converged = false;
  std::string message;
};

/// Central differences with step fd_step * max(1, |x_k|). Non-finite or
/// throwing evaluations propagate.
std::vector<double> fd_gradient(const Objective& f, const std::vector<double>& x, double step);

/// Central-difference Jacobian of a vector function, one row per output.
Eigen::MatrixXd fd_jacobian(const VectorObjective& f, const std::vector<double>& x, double step);

/// BFGS on an unconstrained objective with backtracking Armijo line search.
/// Evaluations that throw or return non-finite values are treated as +inf.
OptimResult minimize_bfgs(const Objective& f, std::vector<double> x0,
                          const OptimOptions& opts = {});

}  // namespace sdnet
