#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semtex/core/types.hpp"

namespace semtex::manifold {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr int kDefaultKnn = 10;
inline constexpr int kDefaultDMax = 10;
inline constexpr double kAxisThreshold = 0.55;

/// Pearson correlation. Zero-variance rule: if either input is constant the
/// result is 1 when the inputs are identical and 0 otherwise.
double pearson(std::span<const double> a, std::span<const double> b);

/// 1 - pearson, clipped to [0, 2].
double correlation_distance(std::span<const double> a, std::span<const double> b);

/// Pairwise correlation distances between descriptions. Throws InvalidInput
/// for fewer than 2 descriptions.
Matrix correlation_distance(const std::vector<SemanticVector>& descriptions);

/// Pairwise Euclidean distances between the rows of `points`.
Matrix euclidean_distance(const Matrix& points);

/// Symmetric within 1e-9, zero diagonal, nonnegative, finite.
void validate_distance_matrix(const Matrix& d);

struct Edge {
  int to = 0;
  double weight = 0.0;
};

struct Graph {
  std::vector<std::vector<Edge>> adjacency;
  int k_requested = 0;
  int k_used = 0;

  int size() const { return static_cast<int>(adjacency.size()); }
  bool connected() const;
};

/// Symmetrized kNN graph; neighbors ordered by (distance, index). When the
/// graph is disconnected k is raised by one until it is connected; the final
/// value is in k_used.
Graph knn_graph(const Matrix& d, int k);

/// The same construction at a fixed k, without repair.
Graph knn_graph_fixed(const Matrix& d, int k);

/// All-pairs shortest paths, one binary-heap Dijkstra per source. Throws
/// InvalidInput on a disconnected graph or a negative weight.
Matrix geodesics(const Graph& g);

struct MdsResult {
  Matrix coords;       // n x d
  Vector eigenvalues;  // top d, nonincreasing, negatives truncated to 0
  Matrix eigenvectors; // n x d, unit norm, largest-|.| component positive
  int positive_dims = 0;
  std::string warning;
};

/// Classical MDS on B = -1/2 J D^2 J. Dimensions beyond the positive
/// eigenvalue count are zero-padded and reported in `warning`.
MdsResult classical_mds(const Matrix& d, int dims);

/// residual(d) = 1 - r^2 between upper-triangle entries of `geo` and the
/// Euclidean distances of the first d MDS coordinates, d = 1..d_max.
std::vector<double> residual_curve(const Matrix& geo, int d_max);
std::vector<double> residual_curve(const Matrix& geo, const MdsResult& mds);

/// argmax over 2 <= d <= m-1 of r(d-1) - 2 r(d) + r(d+1), ties to the
/// smallest d. Returns 1 when no second difference is positive. Throws
/// InvalidInput for fewer than 3 residuals.
int pick_dimension(std::span<const double> residuals);

struct IsomapOptions {
  int k = kDefaultKnn;
  int d_max = kDefaultDMax;
  std::optional<int> dims;  // fixed dimension instead of the elbow rule
};

struct IsomapResult {
  Graph graph;
  Matrix geodesics;
  MdsResult mds;  // carries d_max dimensions
  std::vector<double> residuals;
  int d = 1;

  Matrix coords() const { return mds.coords.leftCols(d); }
};

/// kNN graph, geodesics, classical MDS and elbow selection on an arbitrary
/// distance matrix.
IsomapResult isomap(const Matrix& distances, const IsomapOptions& opts = {});

/// Isomap embedding of semantic descriptions under correlation distance,
/// with what out-of-sample projection needs.
struct EmbeddingModel {
  Matrix coords;        // n x d
  int d = 1;
  Matrix geodesics;     // n x n
  int knn_k = kDefaultKnn;  // k actually used after repair
  int knn_k_requested = kDefaultKnn;
  Vector eigenvalues;   // d
  Matrix eigenvectors;  // n x d
  Vector mean_sq_geodesic;  // per-landmark mean of squared geodesics
  std::vector<double> residuals;
  std::vector<SemanticVector> descriptions;

  std::size_t size() const { return descriptions.size(); }
};

/// Throws InvalidInput for fewer than k+1 descriptions or when every pairwise
/// correlation distance is zero (e.g. all descriptions identical).
EmbeddingModel build_embedding(const std::vector<SemanticVector>& descriptions,
                               const IsomapOptions& opts = {});

/// Landmark (Nystrom) projection: geodesics from v approximated through its
/// knn_k nearest landmarks, then
/// p_a = 1 / (2 sqrt(lambda_a)) * sum_i v_ia (mean_sq_i - geo(v, i)^2).
Vector embed_out_of_sample(const EmbeddingModel& model, const SemanticVector& v);

struct AxisCorrelations {
  Matrix table;  // 43 x d
  std::vector<std::vector<std::size_t>> above_threshold;  // per axis, attribute indices
  /// Axis (0-based) with the largest |r| above the threshold, per attribute.
  std::vector<std::optional<int>> attribute_axis;
};

/// Pearson correlation of each attribute column with each coordinate axis;
/// zero-variance columns correlate as 0.
AxisCorrelations axis_attribute_correlations(const Matrix& coords,
                                             const std::vector<SemanticVector>& raw,
                                             double threshold = kAxisThreshold);

/// Axis label for display: X, Y, Z, then "axis4", ...
std::string axis_label(int axis);

/// FNV-1a over the 43 values' bit patterns.
std::string description_checksum(const SemanticVector& v);

/// embedding.json: coords, eigenvalues, d, k, residuals and description
/// checksums. Loading recomputes the geodesics from the descriptions and
/// verifies checksums and coordinates.
void save_embedding(const EmbeddingModel& model, const std::filesystem::path& path);
EmbeddingModel load_embedding(const std::filesystem::path& path,
                              const std::vector<SemanticVector>& descriptions);

void write_residuals_csv(const std::filesystem::path& path, std::span<const double> residuals);

}  // namespace semtex::manifold
