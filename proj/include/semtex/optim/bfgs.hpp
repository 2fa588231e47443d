#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "semtex/core/error.hpp"

namespace semtex::optim {

using Vector = Eigen::VectorXd;

struct OptimProblem {
  Eigen::Index dim = 0;
  std::function<double(const Vector&)> objective;
  std::function<Vector(const Vector&)> gradient;
  /// Optional fused evaluation; used instead of objective/gradient when set.
  std::function<double(const Vector&, Vector& grad)> value_and_gradient;

  double evaluate(const Vector& x, Vector& grad) const;
};

struct OptimResult {
  Vector x_star;
  double f_star = 0.0;
  int iterations = 0;
  double grad_norm = 0.0;  // infinity norm at x_star
  bool converged = false;
  std::string message;
  std::vector<double> objective_history;  // f at x0 and after each accepted step
};

struct BfgsOptions {
  double tol = 1e-8;
  int max_iter = 500;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_line_search_evals = 60;
  // Skip the update when s'y <= curvature_skip * |s| |y|. Scale-free, so
  // late tiny steps near the minimizer still update the approximation.
  double curvature_skip = 1e-10;
  // Relative size of objective changes treated as rounding noise once the
  // Armijo test can no longer resolve progress.
  double rounding_tol = 1e-12;
};

/// Raised when the objective or gradient becomes non-finite; carries the
/// last iterate at which both were finite.
class OptimError : public NumericError {
 public:
  OptimError(const std::string& what, Vector last_good, double last_f)
      : NumericError(what), last_good_(std::move(last_good)), last_f_(last_f) {}
  const Vector& last_good() const { return last_good_; }
  double last_objective() const { return last_f_; }

 private:
  Vector last_good_;
  double last_f_;
};

/// Dense-inverse-Hessian BFGS with a strong-Wolfe line search (bracketing
/// plus cubic interpolation). Stops when ||grad||_inf <= tol or after
/// max_iter accepted steps.
OptimResult bfgs_minimize(const OptimProblem& problem, const Vector& x0, const BfgsOptions& opts);
OptimResult bfgs_minimize(const OptimProblem& problem, const Vector& x0, double tol, int max_iter);

/// Central differences (f(x + h e_k) - f(x - h e_k)) / 2h.
Vector finite_diff_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                            double h);

}  // namespace semtex::optim
