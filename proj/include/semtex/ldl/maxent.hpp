#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "semtex/core/types.hpp"
#include "semtex/features/standardize.hpp"
#include "semtex/optim/bfgs.hpp"

namespace semtex::ldl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kDefaultC = 100.0;

/// p(y_j | x) = exp(theta_j . x + bias_j) / Z on standardized features. The
/// bias is the weight of an implicit constant feature and is penalized like
/// any other weight; a model built without intercept keeps it at zero.
struct MaxEntModel {
  Matrix theta;  // c x q
  Vector bias;   // c
  features::FeatureStats feature_stats;
  double l2_penalty = kDefaultC;

  std::size_t num_labels() const { return static_cast<std::size_t>(theta.rows()); }
  std::size_t feature_dim() const { return static_cast<std::size_t>(theta.cols()); }

  /// Throws InvalidInput when shapes disagree or a weight is non-finite.
  void validate() const;

  /// Zero weights and identity stats; predicts the uniform distribution.
  static MaxEntModel zeros(std::size_t c, std::size_t q);
};

struct TrainingSet {
  Matrix features;  // n x q
  std::vector<Distribution> targets;

  std::size_t size() const { return targets.size(); }
  void validate() const;
};

/// Sum_j p_j ln(p_j / q_j) with 0 ln 0 = 0; q is floored at epsilon and
/// renormalized first.
double kl_divergence(const Distribution& p, const Distribution& q,
                     double epsilon = kDefaultEpsilon);

/// Minimizer of sum_i KL(P || P_i): the normalized geometric mean of the
/// (epsilon-floored) targets.
Distribution consensus_distribution(const std::vector<Distribution>& targets,
                                    double epsilon = kDefaultEpsilon);

/// Normalized exponential with max subtraction.
Distribution softmax(const Vector& scores);

/// Applies the stored standardization, then the model.
Distribution predict(const MaxEntModel& model, std::span<const double> x);
/// x already standardized.
Distribution predict_standardized(const MaxEntModel& model, const Vector& x);

struct ObjectiveValue {
  double value = 0.0;         // -T(theta) + penalty
  double data_term = 0.0;     // -T(theta)
  double penalty_term = 0.0;  // (1 / 2C) (||theta||^2 + ||bias||^2)
  Matrix grad_theta;
  Vector grad_bias;
};

/// Objective and analytic gradient on ts.features as given (no
/// standardization is applied here). Throws NumericError on a non-finite
/// intermediate.
ObjectiveValue target_and_gradient(const Matrix& theta, const Vector& bias, const TrainingSet& ts,
                                   double C);
ObjectiveValue target_and_gradient(const Matrix& theta, const TrainingSet& ts, double C);

struct TrainOptions {
  double C = kDefaultC;
  double tol = 1e-6;
  int max_iter = 2000;
  bool standardize = true;
  bool fit_intercept = true;
};

struct TrainReport {
  MaxEntModel model;
  optim::OptimResult optim;
  double initial_mean_kl = 0.0;  // at theta = 0
  double final_mean_kl = 0.0;
};

/// Minimizes the penalized objective from theta = 0 with BFGS. Optimizer
/// failures propagate as optim::OptimError.
TrainReport train(const TrainingSet& ts, const TrainOptions& opts = {});

/// Mean KL(target || prediction) of `model` on raw (unstandardized) features.
double mean_kl(const MaxEntModel& model, const TrainingSet& ts);

struct MetricTable {
  double kl = 0.0;
  double euclidean = 0.0;
  double sorensen = 0.0;
  double chi2 = 0.0;
  std::size_t samples = 0;
};

double euclidean_distance(const Distribution& p, const Distribution& q);
double sorensen_distance(const Distribution& p, const Distribution& q);
double chi2_distance(const Distribution& p, const Distribution& q);

/// Averages of KL(truth || pred), Euclidean, Sorensen and chi-squared.
MetricTable evaluate(const std::vector<Distribution>& pred, const std::vector<Distribution>& truth);

void write_evaluation_csv(const std::filesystem::path& path, const std::string& row_label,
                          const MetricTable& table);

void save_model(const MaxEntModel& model, const std::filesystem::path& path);
/// Throws IoError for unreadable files and InvalidInput for malformed content
/// or a 43-label model whose vocabulary hash differs from this build's.
MaxEntModel load_model(const std::filesystem::path& path);

}  // namespace semtex::ldl
