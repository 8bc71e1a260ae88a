#pragma once

#include <functional>

namespace volkit::quadrature {

struct Result {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

/// Globally adaptive 7/15-point Gauss-Kronrod on [a, b]: the panel with the largest error
/// estimate is bisected until the summed error meets the tolerance or max_panels is reached.
Result gauss_kronrod(const std::function<double(double)>& f, double a, double b, double abs_tol = 1e-13,
                     double rel_tol = 1e-12, int max_panels = 2000);

/// Integral of f over [a, +inf) through x = a + t / (1 - t).
Result upper_tail(const std::function<double(double)>& f, double a, double abs_tol = 1e-13, double rel_tol = 1e-12);

/// Integral of f over (-inf, b].
Result lower_tail(const std::function<double(double)>& f, double b, double abs_tol = 1e-13, double rel_tol = 1e-12);

}  // namespace volkit::quadrature
