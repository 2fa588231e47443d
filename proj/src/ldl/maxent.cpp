#include "semtex/ldl/maxent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "json.hpp"
#include "semtex/core/attributes.hpp"
#include "semtex/core/error.hpp"
#include "semtex/core/textio.hpp"

namespace semtex::ldl {

using nlohmann::json;

void MaxEntModel::validate() const {
  if (bias.size() != theta.rows()) throw InvalidInput("bias length does not match label count");
  if (feature_stats.dim() != feature_dim() || feature_stats.stddev.size() != feature_dim()) {
    throw InvalidInput("feature stats length does not match theta columns");
  }
  if (!theta.allFinite() || !bias.allFinite()) throw InvalidInput("model weights are not finite");
  if (!(l2_penalty > 0.0)) throw InvalidInput("penalty coefficient C must be positive");
}

MaxEntModel MaxEntModel::zeros(std::size_t c, std::size_t q) {
  MaxEntModel m;
  m.theta = Matrix::Zero(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(q));
  m.bias = Vector::Zero(static_cast<Eigen::Index>(c));
  m.feature_stats = features::FeatureStats::identity(q);
  return m;
}

void TrainingSet::validate() const {
  if (static_cast<std::size_t>(features.rows()) != targets.size()) {
    throw InvalidInput("training set has " + std::to_string(features.rows()) + " feature rows but " +
                       std::to_string(targets.size()) + " targets");
  }
  if (targets.empty()) throw InvalidInput("training set is empty");
  const std::size_t c = targets.front().size();
  for (const auto& t : targets) {
    if (t.size() != c) throw InvalidInput("targets have differing label counts");
  }
  if (!features.allFinite()) throw InvalidInput("training features are not finite");
}

double kl_divergence(const Distribution& p, const Distribution& q, double epsilon) {
  if (p.size() != q.size()) throw InvalidInput("distributions differ in length");
  // Re-flooring an already floored q would perturb it by rounding, so that
  // KL(p || p) is exactly zero for floored inputs.
  const bool floored = std::all_of(q.values().begin(), q.values().end(), [&](double x) { return x >= epsilon; });
  const Distribution qf = floored ? q : to_distribution(q.values(), epsilon);
  double kl = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] > 0.0) kl += p[j] * std::log(p[j] / qf[j]);
  }
  return std::max(kl, 0.0);
}

Distribution consensus_distribution(const std::vector<Distribution>& targets, double epsilon) {
  if (targets.empty()) throw InvalidInput("consensus of an empty list");
  const std::size_t c = targets.front().size();
  Vector mean_log = Vector::Zero(static_cast<Eigen::Index>(c));
  for (const auto& t : targets) {
    if (t.size() != c) throw InvalidInput("targets have differing label counts");
    const Distribution f = to_distribution(t.values(), epsilon);
    for (std::size_t j = 0; j < c; ++j) mean_log[static_cast<Eigen::Index>(j)] += std::log(f[j]);
  }
  mean_log /= static_cast<double>(targets.size());
  return softmax(mean_log);
}

Distribution softmax(const Vector& scores) {
  if (scores.size() == 0) throw InvalidInput("softmax of an empty vector");
  if (!scores.allFinite()) throw NumericError("non-finite score in softmax");
  const double mx = scores.maxCoeff();
  std::vector<double> p(static_cast<std::size_t>(scores.size()));
  double z = 0.0;
  for (Eigen::Index j = 0; j < scores.size(); ++j) {
    p[static_cast<std::size_t>(j)] = std::exp(scores[j] - mx);
    z += p[static_cast<std::size_t>(j)];
  }
  for (double& v : p) v /= z;
  return Distribution(std::move(p));
}

Distribution predict_standardized(const MaxEntModel& model, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != model.feature_dim()) {
    throw InvalidInput("feature vector has dimension " + std::to_string(x.size()) + ", model expects " +
                       std::to_string(model.feature_dim()));
  }
  return softmax(model.theta * x + model.bias);
}

Distribution predict(const MaxEntModel& model, std::span<const double> x) {
  if (x.size() != model.feature_dim()) {
    throw InvalidInput("feature vector has dimension " + std::to_string(x.size()) + ", model expects " +
                       std::to_string(model.feature_dim()));
  }
  const std::vector<double> z = model.feature_stats.apply(x);
  return predict_standardized(model, Eigen::Map<const Vector>(z.data(), static_cast<Eigen::Index>(z.size())));
}

namespace {

Matrix target_matrix(const TrainingSet& ts) {
  const auto n = static_cast<Eigen::Index>(ts.size());
  const auto c = static_cast<Eigen::Index>(ts.targets.front().size());
  Matrix v(n, c);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& t = ts.targets[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < c; ++j) v(i, j) = t[static_cast<std::size_t>(j)];
  }
  return v;
}

ObjectiveValue objective_with_targets(const Matrix& theta, const Vector& bias, const Matrix& X,
                                      const Matrix& V, double C) {
  if (!(C > 0.0)) throw InvalidInput("penalty coefficient C must be positive");
  if (theta.cols() != X.cols()) throw InvalidInput("theta columns do not match feature dimension");
  if (theta.rows() != V.cols() || bias.size() != theta.rows()) {
    throw InvalidInput("theta rows do not match label count");
  }
  Matrix scores = X * theta.transpose();
  scores.rowwise() += bias.transpose();

  ObjectiveValue out;
  Matrix resid(scores.rows(), scores.cols());  // p - v
  double t = 0.0;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const double mx = scores.row(i).maxCoeff();
    double z = 0.0;
    for (Eigen::Index j = 0; j < scores.cols(); ++j) {
      const double e = std::exp(scores(i, j) - mx);
      resid(i, j) = e;
      z += e;
    }
    const double lse = mx + std::log(z);
    t += V.row(i).dot(scores.row(i)) - lse;
    resid.row(i) /= z;
    resid.row(i) -= V.row(i);
  }
  out.data_term = -t;
  out.penalty_term = (theta.squaredNorm() + bias.squaredNorm()) / (2.0 * C);
  out.value = out.data_term + out.penalty_term;
  out.grad_theta = resid.transpose() * X + theta / C;
  out.grad_bias = resid.colwise().sum().transpose() + bias / C;
  if (!std::isfinite(out.value) || !out.grad_theta.allFinite() || !out.grad_bias.allFinite()) {
    throw NumericError("non-finite value in maxent objective");
  }
  return out;
}

}  // namespace

ObjectiveValue target_and_gradient(const Matrix& theta, const Vector& bias, const TrainingSet& ts,
                                   double C) {
  ts.validate();
  return objective_with_targets(theta, bias, ts.features, target_matrix(ts), C);
}

ObjectiveValue target_and_gradient(const Matrix& theta, const TrainingSet& ts, double C) {
  return target_and_gradient(theta, Vector::Zero(theta.rows()), ts, C);
}

double mean_kl(const MaxEntModel& model, const TrainingSet& ts) {
  ts.validate();
  double total = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const Vector row = ts.features.row(static_cast<Eigen::Index>(i)).transpose();
    total += kl_divergence(ts.targets[i], predict(model, std::span<const double>(row.data(), row.size())));
  }
  return total / static_cast<double>(ts.size());
}

TrainReport train(const TrainingSet& ts, const TrainOptions& opts) {
  ts.validate();
  if (ts.size() < 2) throw InvalidInput("training needs at least 2 samples");
  if (!(opts.C > 0.0)) throw InvalidInput("penalty coefficient C must be positive");
  const auto c = static_cast<Eigen::Index>(ts.targets.front().size());
  const auto q = ts.features.cols();

  MaxEntModel model = MaxEntModel::zeros(static_cast<std::size_t>(c), static_cast<std::size_t>(q));
  model.l2_penalty = opts.C;

  Matrix X = ts.features;
  if (opts.standardize) {
    std::vector<std::vector<double>> rows(ts.size(), std::vector<double>(static_cast<std::size_t>(q)));
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      for (Eigen::Index k = 0; k < q; ++k) rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = X(i, k);
    }
    features::Standardized s = features::standardize(rows);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      for (Eigen::Index k = 0; k < q; ++k) X(i, k) = s.rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
    }
    model.feature_stats = std::move(s.stats);
  }
  // Targets are floored so that KL terms stay defined.
  TrainingSet floored{ts.features, {}};
  floored.targets.reserve(ts.size());
  for (const auto& t : ts.targets) floored.targets.push_back(to_distribution(t.values()));
  const Matrix V = target_matrix(floored);

  const Eigen::Index n_theta = c * q;
  const Eigen::Index dim = n_theta + (opts.fit_intercept ? c : 0);

  auto unpack = [&](const Vector& w, Matrix& theta, Vector& bias) {
    theta = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(w.data(), c, q);
    bias = opts.fit_intercept ? Vector(w.segment(n_theta, c)) : Vector::Zero(c);
  };

  optim::OptimProblem problem;
  problem.dim = dim;
  problem.value_and_gradient = [&](const Vector& w, Vector& grad) {
    Matrix theta;
    Vector bias;
    unpack(w, theta, bias);
    ObjectiveValue ov = objective_with_targets(theta, bias, X, V, opts.C);
    grad.resize(dim);
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(grad.data(), c, q) =
        ov.grad_theta;
    if (opts.fit_intercept) grad.segment(n_theta, c) = ov.grad_bias;
    return ov.value;
  };

  TrainReport report;
  report.initial_mean_kl = mean_kl(model, floored);
  report.optim = optim::bfgs_minimize(problem, Vector::Zero(dim), opts.tol, opts.max_iter);
  unpack(report.optim.x_star, model.theta, model.bias);
  model.validate();
  report.final_mean_kl = mean_kl(model, floored);
  report.model = std::move(model);
  return report;
}

double euclidean_distance(const Distribution& p, const Distribution& q) {
  if (p.size() != q.size()) throw InvalidInput("distributions differ in length");
  double s = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) s += (p[j] - q[j]) * (p[j] - q[j]);
  return std::sqrt(s);
}

double sorensen_distance(const Distribution& p, const Distribution& q) {
  if (p.size() != q.size()) throw InvalidInput("distributions differ in length");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    num += std::abs(p[j] - q[j]);
    den += p[j] + q[j];
  }
  return den > 0.0 ? num / den : 0.0;
}

double chi2_distance(const Distribution& p, const Distribution& q) {
  if (p.size() != q.size()) throw InvalidInput("distributions differ in length");
  double s = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double den = p[j] + q[j];
    if (den > 0.0) s += (p[j] - q[j]) * (p[j] - q[j]) / den;
  }
  return s;
}

MetricTable evaluate(const std::vector<Distribution>& pred, const std::vector<Distribution>& truth) {
  if (pred.size() != truth.size()) {
    throw InvalidInput("evaluate: " + std::to_string(pred.size()) + " predictions vs " +
                       std::to_string(truth.size()) + " ground-truth distributions");
  }
  MetricTable t;
  t.samples = pred.size();
  if (pred.empty()) return t;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    t.kl += kl_divergence(truth[i], pred[i]);
    t.euclidean += euclidean_distance(pred[i], truth[i]);
    t.sorensen += sorensen_distance(pred[i], truth[i]);
    t.chi2 += chi2_distance(pred[i], truth[i]);
  }
  const double n = static_cast<double>(pred.size());
  t.kl /= n;
  t.euclidean /= n;
  t.sorensen /= n;
  t.chi2 /= n;
  return t;
}

void write_evaluation_csv(const std::filesystem::path& path, const std::string& row_label,
                          const MetricTable& table) {
  char line[256];
  std::snprintf(line, sizeof line, "%s,%zu,%.6f,%.6f,%.6f,%.6f\n", row_label.c_str(), table.samples,
                table.kl, table.euclidean, table.sorensen, table.chi2);
  write_text_file(path, std::string("features,samples,kl,euclidean,sorensen,chi2\n") + line);
}

namespace {
constexpr const char* kModelFormat = "semtex-maxent-v1";

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }
}  // namespace

void save_model(const MaxEntModel& model, const std::filesystem::path& path) {
  model.validate();
  json j;
  j["format"] = kModelFormat;
  j["vocabulary_hash"] = vocabulary_hash_hex();
  j["num_labels"] = model.num_labels();
  j["feature_dim"] = model.feature_dim();
  j["C"] = model.l2_penalty;
  std::vector<double> theta;
  theta.reserve(model.num_labels() * model.feature_dim());
  for (Eigen::Index r = 0; r < model.theta.rows(); ++r) {
    for (Eigen::Index k = 0; k < model.theta.cols(); ++k) theta.push_back(model.theta(r, k));
  }
  j["theta"] = theta;
  j["bias"] = to_std(model.bias);
  j["feature_mean"] = model.feature_stats.mean;
  j["feature_std"] = model.feature_stats.stddev;
  write_text_file(path, j.dump(1) + "\n");
}

MaxEntModel load_model(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != kModelFormat) {
      throw InvalidInput(path.string() + ": unsupported model format");
    }
    const auto c = j.at("num_labels").get<std::size_t>();
    const auto q = j.at("feature_dim").get<std::size_t>();
    if (c == kNumAttributes && j.at("vocabulary_hash").get<std::string>() != vocabulary_hash_hex()) {
      throw InvalidInput(path.string() + ": attribute vocabulary hash mismatch");
    }
    const auto theta = j.at("theta").get<std::vector<double>>();
    const auto bias = j.at("bias").get<std::vector<double>>();
    if (theta.size() != c * q || bias.size() != c) {
      throw InvalidInput(path.string() + ": weight arrays do not match declared shape");
    }
    MaxEntModel m = MaxEntModel::zeros(c, q);
    for (std::size_t r = 0; r < c; ++r) {
      for (std::size_t k = 0; k < q; ++k) {
        m.theta(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = theta[r * q + k];
      }
      m.bias[static_cast<Eigen::Index>(r)] = bias[r];
    }
    m.feature_stats.mean = j.at("feature_mean").get<std::vector<double>>();
    m.feature_stats.stddev = j.at("feature_std").get<std::vector<double>>();
    m.l2_penalty = j.at("C").get<double>();
    m.validate();
    return m;
  } catch (const json::exception& e) {
    throw InvalidInput(path.string() + ": malformed model file (" + e.what() + ")");
  }
}

}  // namespace semtex::ldl
