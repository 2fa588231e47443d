#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "semtex/core/types.hpp"
#include "semtex/ldl/maxent.hpp"
#include "semtex/optim/bfgs.hpp"

namespace semtex::testing {

inline Distribution random_simplex(std::size_t c, std::mt19937_64& rng, double concentration = 1.0) {
  std::gamma_distribution<double> g(concentration, 1.0);
  std::vector<double> v(c);
  double s = 0.0;
  for (double& x : v) {
    x = g(rng) + 1e-3;
    s += x;
  }
  for (double& x : v) x /= s;
  return Distribution(std::move(v));
}

// Numeric minimizer of sum_i KL(P || P_i) over the simplex, with P = softmax(z).
// df/dP_j = n (ln P_j + 1) - sum_i ln P_ij, chained through the softmax Jacobian.
inline Distribution numeric_consensus(const std::vector<Distribution>& targets) {
  const auto c = static_cast<Eigen::Index>(targets.front().size());
  const double n = static_cast<double>(targets.size());
  Eigen::VectorXd sum_log = Eigen::VectorXd::Zero(c);
  for (const auto& t : targets)
    for (Eigen::Index j = 0; j < c; ++j) sum_log[j] += std::log(t[static_cast<std::size_t>(j)]);

  auto probs = [c](const Eigen::VectorXd& z) {
    Eigen::VectorXd p = (z.array() - z.maxCoeff()).exp();
    return Eigen::VectorXd(p / p.sum());
  };
  optim::OptimProblem prob;
  prob.dim = c;
  prob.objective = [&](const Eigen::VectorXd& z) {
    const Eigen::VectorXd p = probs(z);
    double f = 0.0;
    for (Eigen::Index j = 0; j < c; ++j) f += n * p[j] * std::log(p[j]) - p[j] * sum_log[j];
    return f;
  };
  prob.gradient = [&](const Eigen::VectorXd& z) {
    const Eigen::VectorXd p = probs(z);
    Eigen::VectorXd g(c);
    for (Eigen::Index j = 0; j < c; ++j) g[j] = n * (std::log(p[j]) + 1.0) - sum_log[j];
    const double avg = p.dot(g);
    return Eigen::VectorXd(p.array() * (g.array() - avg));
  };
  auto r = optim::bfgs_minimize(prob, Eigen::VectorXd::Zero(c), 1e-13, 500);
  const Eigen::VectorXd p = probs(r.x_star);
  return Distribution(std::vector<double>(p.data(), p.data() + p.size()));
}

struct GradientInstance {
  ldl::TrainingSet ts;
  Eigen::MatrixXd theta;
  Eigen::VectorXd bias;
  double C = 1.0;
};

inline GradientInstance random_gradient_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_d(1, 5), c_d(2, 5), q_d(1, 4);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> c_pen(0.5, 100.0);
  GradientInstance g;
  const int n = n_d(rng), c = c_d(rng), q = q_d(rng);
  g.ts.features.resize(n, q);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < q; ++k) g.ts.features(i, k) = normal(rng);
  for (int i = 0; i < n; ++i) g.ts.targets.push_back(random_simplex(static_cast<std::size_t>(c), rng));
  g.theta.resize(c, q);
  for (int j = 0; j < c; ++j)
    for (int k = 0; k < q; ++k) g.theta(j, k) = normal(rng);
  g.bias.resize(c);
  for (int j = 0; j < c; ++j) g.bias[j] = normal(rng);
  g.C = c_pen(rng);
  return g;
}

// Relative error ||analytic - numeric|| / max(||numeric||, 1e-12) over the
// stacked (theta row-major, bias) gradient.
inline double gradient_check(const GradientInstance& g) {
  const auto c = g.theta.rows();
  const auto q = g.theta.cols();
  auto pack = [&](const Eigen::MatrixXd& t, const Eigen::VectorXd& b) {
    Eigen::VectorXd w(c * q + c);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index k = 0; k < q; ++k) w[j * q + k] = t(j, k);
    w.tail(c) = b;
    return w;
  };
  auto value = [&](const Eigen::VectorXd& w) {
    Eigen::MatrixXd t(c, q);
    for (Eigen::Index j = 0; j < c; ++j)
      for (Eigen::Index k = 0; k < q; ++k) t(j, k) = w[j * q + k];
    return ldl::target_and_gradient(t, Eigen::VectorXd(w.tail(c)), g.ts, g.C).value;
  };
  const auto ov = ldl::target_and_gradient(g.theta, g.bias, g.ts, g.C);
  const Eigen::VectorXd analytic = pack(ov.grad_theta, ov.grad_bias);
  const Eigen::VectorXd numeric = optim::finite_diff_gradient(value, pack(g.theta, g.bias), 1e-5);
  return (analytic - numeric).norm() / std::max(numeric.norm(), 1e-12);
}

struct HiddenModelData {
  ldl::TrainingSet ts;
  Eigen::MatrixXd theta;
};

// Targets are exact predictions of a hidden maxent model (no intercept,
// identity standardization).
inline HiddenModelData hidden_model_data(int n, int c, int q, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  HiddenModelData d;
  d.theta.resize(c, q);
  for (int j = 0; j < c; ++j)
    for (int k = 0; k < q; ++k) d.theta(j, k) = scale * normal(rng);
  d.ts.features.resize(n, q);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < q; ++k) d.ts.features(i, k) = normal(rng);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd s = d.theta * d.ts.features.row(i).transpose();
    d.ts.targets.push_back(ldl::softmax(s));
  }
  return d;
}

}  // namespace semtex::testing
