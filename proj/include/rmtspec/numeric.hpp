#pragma once

#include <functional>
#include <vector>

namespace rmtspec::numeric {

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance `tol`.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol, int max_depth = 40);

struct ScalarMinimum {
  double x;
  double value;
};

/// Golden-section search for a minimum of f on [lo, hi].
ScalarMinimum golden_section(const std::function<double(double)>& f, double lo, double hi, double x_tol,
                             int max_iter = 200);

struct NelderMeadResult {
  std::vector<double> x;
  double value;
  int iterations;
  bool converged;
};

struct NelderMeadOptions {
  double initial_step = 0.5;
  double f_tol = 1e-10;
  double x_tol = 1e-9;
  int max_iter = 2000;
};

/// Downhill simplex minimization. Non-finite objective values are treated as +inf.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> start,
                             const NelderMeadOptions& options = {});

/// Ordinary least-squares slope of y on x.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace rmtspec::numeric
