#pragma once

#include <functional>
#include <vector>

namespace coinccl {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0; // absolute error estimate
  long evaluations = 0;
  bool converged = false;
};

struct QuadratureOptions {
  double rel_tol = 1e-6;
  double abs_tol = 0.0;
  long max_evaluations = 1 << 14;
  // interior points where the integrand is kinked or discontinuous;
  // the initial segmentation cuts there instead of letting the
  // refinement loop discover them
  std::vector<double> split_points;
};

/// adaptive Gauss-Kronrod 15(7) on [a, b]
QuadratureResult integrate(const std::function<double(double)>& f, double a,
                           double b, const QuadratureOptions& opt = {});

/// as integrate(), but throws numerical_error when the tolerance was not met
double integrate_or_throw(const std::function<double(double)>& f, double a,
                          double b, const QuadratureOptions& opt = {},
                          const char* what = "quadrature did not converge");

} // namespace coinccl
