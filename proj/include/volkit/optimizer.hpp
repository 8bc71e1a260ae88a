#pragma once

// Derivative-free and quasi-Newton minimizers plus finite-difference derivatives.

#include <functional>

#include <Eigen/Dense>

namespace volkit::optim {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct Minimum {
  Eigen::VectorXd x;
  double value = 0.0;
  int evaluations = 0;
  int iterations = 0;
};

struct NelderMeadOptions {
  double initial_step = 0.5;  // absolute, per coordinate
  double f_tolerance = 1e-9;
  double x_tolerance = 1e-7;
  int max_evaluations = 2000;
};

/// Minimizes f; non-finite values are treated as +inf.
Minimum nelder_mead(const Objective& f, const Eigen::VectorXd& start, const NelderMeadOptions& options = {});

struct BfgsOptions {
  double gradient_tolerance = 1e-6;
  int max_iterations = 200;
};

/// BFGS with central-difference gradients and a backtracking Armijo line search.
Minimum bfgs(const Objective& f, const Eigen::VectorXd& start, const BfgsOptions& options = {});

/// Central differences with step cbrt(eps) * max(1, |x_i|).
Eigen::VectorXd central_gradient(const Objective& f, const Eigen::VectorXd& x);

/// Central differences of central-difference gradients. The result is not symmetrized;
/// callers check and symmetrize.
Eigen::MatrixXd central_hessian(const Objective& f, const Eigen::VectorXd& x);

}  // namespace volkit::optim
