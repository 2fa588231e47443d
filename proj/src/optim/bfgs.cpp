#include "semtex/optim/bfgs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace semtex::optim {

double OptimProblem::evaluate(const Vector& x, Vector& grad) const {
  if (value_and_gradient) return value_and_gradient(x, grad);
  grad = gradient(x);
  return objective(x);
}

namespace {

struct Trial {
  double alpha = 0.0;
  double phi = 0.0;
  double dphi = 0.0;
  Vector x;
  Vector g;
};

bool all_finite(const Vector& v) { return v.allFinite(); }

// Minimizer of the cubic matching (a, fa, ga) and (b, fb, gb); NaN when the
// cubic has no interior minimum.
double cubic_minimizer(double a, double fa, double ga, double b, double fb, double gb) {
  const double d1 = ga + gb - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - ga * gb;
  if (!(disc >= 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double d2 = std::copysign(std::sqrt(disc), b - a);
  const double denom = gb - ga + 2.0 * d2;
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return b - (b - a) * (gb + d2 - d1) / denom;
}

class LineSearch {
 public:
  LineSearch(const OptimProblem& p, const BfgsOptions& o, const Vector& x, double f0,
             const Vector& g0, const Vector& dir)
      : problem_(p),
        opts_(o),
        x_(x),
        f0_(f0),
        g0_(g0),
        dir_(dir),
        dphi0_(g0.dot(dir)),
        flat_tol_(o.rounding_tol * std::max(1.0, std::abs(f0))) {}

  // Returns true and fills `out` on success.
  bool run(double alpha_init, Trial& out) {
    Trial prev{0.0, f0_, dphi0_, x_, g0_};
    double alpha = alpha_init;
    for (int i = 0; evals_ < opts_.max_line_search_evals; ++i) {
      Trial cur = eval(alpha);
      if (!sufficient_decrease(cur) || (i > 0 && cur.phi > prev.phi + flat_tol_)) {
        return zoom(prev, cur, out) && polish(out);
      }
      if (std::abs(cur.dphi) <= -opts_.c2 * dphi0_) {
        out = std::move(cur);
        return polish(out);
      }
      if (cur.dphi >= 0.0) return zoom(cur, prev, out) && polish(out);
      prev = std::move(cur);
      alpha *= 2.0;
    }
    return false;
  }

 private:
  Trial eval(double alpha) {
    ++evals_;
    Trial t;
    t.alpha = alpha;
    t.x = x_ + alpha * dir_;
    t.g.resize(x_.size());
    t.phi = problem_.evaluate(t.x, t.g);
    if (!std::isfinite(t.phi) || !all_finite(t.g)) {
      throw OptimError("non-finite objective or gradient at step " + std::to_string(alpha), x_,
                       f0_);
    }
    t.dphi = t.g.dot(dir_);
    return t;
  }

  // Armijo, or near the minimizer where function differences drown in
  // rounding, the derivative form of it (approximate Wolfe): f no higher
  // than f0 up to rounding noise and phi'(a) <= (1 - 2 c1) |phi'(0)|.
  bool sufficient_decrease(const Trial& t) const {
    if (t.phi <= f0_ + opts_.c1 * t.alpha * dphi0_) return true;
    return t.phi <= f0_ + flat_tol_ && t.dphi <= (1.0 - 2.0 * opts_.c1) * -dphi0_;
  }

  bool wolfe(const Trial& t) const {
    return sufficient_decrease(t) && std::abs(t.dphi) <= -opts_.c2 * dphi0_;
  }

  bool zoom(Trial lo, Trial hi, Trial& out) {
    while (evals_ < opts_.max_line_search_evals) {
      const double a = lo.alpha;
      const double b = hi.alpha;
      double alpha = cubic_minimizer(a, lo.phi, lo.dphi, b, hi.phi, hi.dphi);
      const double left = std::min(a, b);
      const double width = std::abs(b - a);
      if (!std::isfinite(alpha) || alpha < left + 0.1 * width || alpha > left + 0.9 * width) {
        alpha = 0.5 * (a + b);
      }
      if (width <= std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(a))) {
        return false;
      }
      Trial cur = eval(alpha);
      if (!sufficient_decrease(cur) || cur.phi > lo.phi + flat_tol_) {
        hi = std::move(cur);
      } else {
        if (std::abs(cur.dphi) <= -opts_.c2 * dphi0_) {
          out = std::move(cur);
          return true;
        }
        if (cur.dphi * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = std::move(cur);
      }
    }
    return false;
  }

  // One secant step on the directional derivative between 0 and the
  // accepted point. On a quadratic this lands on the exact line minimizer,
  // which gives BFGS its finite-termination behavior; using derivatives only
  // avoids the cancellation in function-value differences. The refined point
  // replaces the accepted one only if it is no higher and still satisfies
  // the Wolfe conditions.
  bool polish(Trial& accepted) {
    if (evals_ >= opts_.max_line_search_evals) return true;
    if (std::abs(accepted.dphi) <= 1e-12 * std::abs(dphi0_)) return true;
    const double curvature = accepted.dphi - dphi0_;
    if (!(curvature > 0.0)) return true;
    const double alpha = accepted.alpha * (-dphi0_) / curvature;
    if (!std::isfinite(alpha) || alpha <= 0.0 || alpha > 20.0 * accepted.alpha ||
        std::abs(alpha - accepted.alpha) <= 1e-12 * accepted.alpha) {
      return true;
    }
    Trial cand;
    try {
      cand = eval(alpha);
    } catch (const OptimError&) {
      return true;
    }
    if (wolfe(cand) && cand.phi <= accepted.phi + flat_tol_) accepted = std::move(cand);
    return true;
  }

  const OptimProblem& problem_;
  const BfgsOptions& opts_;
  const Vector& x_;
  double f0_;
  const Vector& g0_;
  const Vector& dir_;
  double dphi0_;
  double flat_tol_;
  int evals_ = 0;
};

}  // namespace

OptimResult bfgs_minimize(const OptimProblem& problem, const Vector& x0, const BfgsOptions& opts) {
  const Eigen::Index n = x0.size();
  if (problem.dim != n) throw InvalidInput("x0 dimension does not match problem dimension");

  OptimResult res;
  Vector x = x0;
  Vector g(n);
  double f = problem.evaluate(x, g);
  if (!std::isfinite(f) || !all_finite(g)) {
    throw OptimError("non-finite objective or gradient at x0", x, f);
  }
  res.objective_history.push_back(f);

  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  bool scaled = false;
  bool just_reset = true;

  while (true) {
    const double gnorm = n > 0 ? g.lpNorm<Eigen::Infinity>() : 0.0;
    if (gnorm <= opts.tol) {
      res.converged = true;
      res.message = "gradient tolerance reached";
      break;
    }
    if (res.iterations >= opts.max_iter) {
      res.message = "iteration limit reached";
      break;
    }

    Vector dir = -(H * g);
    if (!(g.dot(dir) < 0.0)) {
      H.setIdentity();
      scaled = false;
      dir = -g;
    }
    const double alpha0 = (res.iterations == 0 || just_reset)
                              ? std::min(1.0, 1.0 / std::max(g.norm(), 1e-300))
                              : 1.0;

    Trial step;
    LineSearch ls(problem, opts, x, f, g, dir);
    if (!ls.run(alpha0, step)) {
      if (!just_reset) {
        H.setIdentity();
        scaled = false;
        just_reset = true;
        continue;
      }
      res.message = "line search failed";
      break;
    }
    just_reset = false;

    const Vector s = step.x - x;
    const Vector y = step.g - g;
    x = std::move(step.x);
    g = std::move(step.g);
    f = step.phi;
    ++res.iterations;
    res.objective_history.push_back(f);

    const double sy = s.dot(y);
    if (sy > opts.curvature_skip * s.norm() * y.norm()) {
      if (!scaled) {
        H *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Vector Hy = H * y;
      const double yHy = y.dot(Hy);
      // H += a s s' - rho (Hy s' + s Hy'), as two in-place rank-one updates.
      const Vector w = (rho * rho * yHy + rho) * s - rho * Hy;
      H.noalias() += s * w.transpose();
      H.noalias() -= (rho * Hy) * s.transpose();
    }
  }

  res.x_star = std::move(x);
  res.f_star = f;
  res.grad_norm = n > 0 ? g.lpNorm<Eigen::Infinity>() : 0.0;
  return res;
}

OptimResult bfgs_minimize(const OptimProblem& problem, const Vector& x0, double tol, int max_iter) {
  BfgsOptions opts;
  opts.tol = tol;
  opts.max_iter = max_iter;
  return bfgs_minimize(problem, x0, opts);
}

Vector finite_diff_gradient(const std::function<double(const Vector&)>& f, const Vector& x,
                            double h) {
  if (!(h > 0.0)) throw InvalidInput("finite difference step must be positive");
  Vector grad(x.size());
  Vector probe = x;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    probe[k] = x[k] + h;
    const double fp = f(probe);
    probe[k] = x[k] - h;
    const double fm = f(probe);
    probe[k] = x[k];
    grad[k] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

}  // namespace semtex::optim
