#pragma once

#include <functional>
#include <vector>

namespace lifetail {

using ObjectiveFn = std::function<double(const std::vector<double>&)>;

struct NelderMeadOptions {
  double initial_step = 0.1;  // relative simplex size
  double ftol = 1e-12;
  int max_iter = 5000;
  int restarts = 2;  // re-expand the simplex at the incumbent
};

struct NelderMeadResult {
  std::vector<double> x;
  double fmin = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Minimizes f starting from x0. Infeasible points may return +inf.
NelderMeadResult nelder_mead(const ObjectiveFn& f, std::vector<double> x0,
                             const NelderMeadOptions& opts = {});

/// Brent minimization of a univariate function on [a, b].
double brent_minimize(const std::function<double(double)>& f, double a, double b,
                      double tol = 1e-10, double* fmin = nullptr);

/// Central-difference gradient with per-coordinate step
/// max(h0, h0 * |x_i|).
std::vector<double> fd_gradient(const ObjectiveFn& f, const std::vector<double>& x,
                                double h0 = 1e-6);

/// Symmetrized central-difference Hessian (row-major n x n).
std::vector<double> fd_hessian(const ObjectiveFn& f, const std::vector<double>& x,
                               double h0 = 1e-5);

/// Monotone piecewise-cubic (Fritsch-Carlson) interpolant through
/// strictly increasing knots xs.
class MonotoneCubic {
 public:
  MonotoneCubic(std::vector<double> xs, std::vector<double> ys);
  double operator()(double x) const;
  /// Solves f(x) = y on [xs.front(), xs.back()]; requires monotone data.
  double solve(double y) const;

 private:
  std::vector<double> xs_, ys_, slopes_;
};

}  // namespace lifetail
