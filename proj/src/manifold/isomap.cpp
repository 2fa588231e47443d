#include "semtex/manifold/isomap.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>

#include "json.hpp"
#include "semtex/core/attributes.hpp"
#include "semtex/core/error.hpp"
#include "semtex/core/hash.hpp"
#include "semtex/core/textio.hpp"

namespace semtex::manifold {

using nlohmann::json;

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidInput("pearson: inputs differ in length");
  const std::size_t n = a.size();
  if (n == 0) throw InvalidInput("pearson: empty input");
  double ma = 0.0;
  double mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) {
    return std::equal(a.begin(), a.end(), b.begin()) ? 1.0 : 0.0;
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double correlation_distance(std::span<const double> a, std::span<const double> b) {
  return std::clamp(1.0 - pearson(a, b), 0.0, 2.0);
}

Matrix correlation_distance(const std::vector<SemanticVector>& descriptions) {
  const auto n = static_cast<Eigen::Index>(descriptions.size());
  if (n < 2) throw InvalidInput("correlation distance needs at least 2 descriptions");
  Matrix d = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = correlation_distance(descriptions[static_cast<std::size_t>(i)].values(),
                                            descriptions[static_cast<std::size_t>(j)].values());
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

Matrix euclidean_distance(const Matrix& points) {
  const auto n = points.rows();
  Matrix d = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = (points.row(i) - points.row(j)).norm();
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

void validate_distance_matrix(const Matrix& d) {
  if (d.rows() != d.cols()) throw InvalidInput("distance matrix is not square");
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    if (d(i, i) != 0.0) throw InvalidInput("distance matrix diagonal is not zero");
    for (Eigen::Index j = 0; j < d.cols(); ++j) {
      if (!std::isfinite(d(i, j)) || d(i, j) < 0.0) {
        throw InvalidInput("distance matrix has a negative or non-finite entry");
      }
      if (std::abs(d(i, j) - d(j, i)) > 1e-9) throw InvalidInput("distance matrix is not symmetric");
    }
  }
}

bool Graph::connected() const {
  const int n = size();
  if (n == 0) return true;
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (const Edge& e : adjacency[static_cast<std::size_t>(u)]) {
      if (!seen[static_cast<std::size_t>(e.to)]) {
        seen[static_cast<std::size_t>(e.to)] = 1;
        ++count;
        stack.push_back(e.to);
      }
    }
  }
  return count == n;
}

namespace {

// Neighbor lists sorted by (distance, index), self excluded.
std::vector<std::vector<int>> sorted_neighbors(const Matrix& d) {
  const int n = static_cast<int>(d.rows());
  std::vector<std::vector<int>> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& o = order[static_cast<std::size_t>(i)];
    o.reserve(static_cast<std::size_t>(n - 1));
    for (int j = 0; j < n; ++j)
      if (j != i) o.push_back(j);
    std::sort(o.begin(), o.end(), [&](int a, int b) {
      return d(i, a) != d(i, b) ? d(i, a) < d(i, b) : a < b;
    });
  }
  return order;
}

Graph graph_from_order(const Matrix& d, const std::vector<std::vector<int>>& order, int k) {
  const int n = static_cast<int>(d.rows());
  std::vector<std::vector<char>> adj(static_cast<std::size_t>(n), std::vector<char>(static_cast<std::size_t>(n), 0));
  for (int i = 0; i < n; ++i) {
    const auto& o = order[static_cast<std::size_t>(i)];
    for (int t = 0; t < std::min<int>(k, static_cast<int>(o.size())); ++t) {
      const int j = o[static_cast<std::size_t>(t)];
      adj[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = 1;
      adj[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = 1;
    }
  }
  Graph g;
  g.k_used = k;
  g.k_requested = k;
  g.adjacency.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (adj[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) {
        g.adjacency[static_cast<std::size_t>(i)].push_back({j, d(i, j)});
      }
  return g;
}

}  // namespace

Graph knn_graph_fixed(const Matrix& d, int k) {
  if (k < 1) throw InvalidInput("k must be >= 1");
  validate_distance_matrix(d);
  return graph_from_order(d, sorted_neighbors(d), k);
}

Graph knn_graph(const Matrix& d, int k) {
  if (k < 1) throw InvalidInput("k must be >= 1");
  validate_distance_matrix(d);
  const auto order = sorted_neighbors(d);
  const int n = static_cast<int>(d.rows());
  int kk = k;
  Graph g = graph_from_order(d, order, kk);
  while (!g.connected() && kk < n - 1) {
    ++kk;
    g = graph_from_order(d, order, kk);
  }
  g.k_requested = k;
  return g;
}

Matrix geodesics(const Graph& g) {
  const int n = g.size();
  for (const auto& list : g.adjacency)
    for (const Edge& e : list)
      if (e.weight < 0.0) throw InvalidInput("geodesics: negative edge weight");
  if (!g.connected()) throw InvalidInput("geodesics: graph is disconnected");

  constexpr double kInf = std::numeric_limits<double>::infinity();
  Matrix out(n, n);
  using Item = std::pair<double, int>;
  std::vector<double> dist(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), kInf);
    dist[static_cast<std::size_t>(s)] = 0.0;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    heap.emplace(0.0, s);
    while (!heap.empty()) {
      const auto [du, u] = heap.top();
      heap.pop();
      if (du > dist[static_cast<std::size_t>(u)]) continue;
      for (const Edge& e : g.adjacency[static_cast<std::size_t>(u)]) {
        const double nd = du + e.weight;
        if (nd < dist[static_cast<std::size_t>(e.to)]) {
          dist[static_cast<std::size_t>(e.to)] = nd;
          heap.emplace(nd, e.to);
        }
      }
    }
    for (int t = 0; t < n; ++t) out(s, t) = dist[static_cast<std::size_t>(t)];
  }
  // Paths found from either end may differ in the last bit; keep it exactly
  // symmetric.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double v = std::min(out(i, j), out(j, i));
      out(i, j) = v;
      out(j, i) = v;
    }
  return out;
}

MdsResult classical_mds(const Matrix& d, int dims) {
  if (dims < 1) throw InvalidInput("MDS dimension must be >= 1");
  if (d.rows() != d.cols() || d.rows() == 0) throw InvalidInput("MDS needs a square distance matrix");
  const auto n = d.rows();
  const Matrix sq = d.array().square().matrix();
  const Vector row_mean = sq.rowwise().mean();
  const Vector col_mean = sq.colwise().mean().transpose();
  const double grand = sq.mean();
  Matrix b(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) b(i, j) = -0.5 * (sq(i, j) - row_mean[i] - col_mean[j] + grand);
  b = 0.5 * (b + b.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> es(b);
  if (es.info() != Eigen::Success) throw NumericError("MDS eigendecomposition failed");

  MdsResult r;
  r.coords = Matrix::Zero(n, dims);
  r.eigenvalues = Vector::Zero(dims);
  r.eigenvectors = Matrix::Zero(n, dims);
  // Eigenvalues below this are numerical zeros of the centered Gram matrix.
  const double scale = std::max(1.0, std::abs(es.eigenvalues()[n - 1]));
  const double zero_tol = 1e-10 * scale;
  for (int a = 0; a < dims && a < n; ++a) {
    const Eigen::Index src = n - 1 - a;
    const double lambda = es.eigenvalues()[src];
    if (!(lambda > zero_tol)) break;
    Vector v = es.eigenvectors().col(src);
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < n; ++i)
      if (std::abs(v[i]) > std::abs(v[arg]) + 1e-12) arg = i;
    if (v[arg] < 0.0) v = -v;
    r.eigenvalues[a] = lambda;
    r.eigenvectors.col(a) = v;
    r.coords.col(a) = v * std::sqrt(lambda);
    r.positive_dims = a + 1;
  }
  if (r.positive_dims < dims) {
    r.warning = "requested " + std::to_string(dims) + " dimensions but only " +
                std::to_string(r.positive_dims) + " eigenvalues are positive; remaining dimensions are zero";
  }
  return r;
}

namespace {

std::vector<double> upper_triangle(const Matrix& m) {
  std::vector<double> out;
  const auto n = m.rows();
  out.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) out.push_back(m(i, j));
  return out;
}

}  // namespace

std::vector<double> residual_curve(const Matrix& geo, const MdsResult& mds) {
  const auto n = geo.rows();
  const auto geo_ut = upper_triangle(geo);
  const int d_max = static_cast<int>(mds.coords.cols());
  std::vector<double> sq(geo_ut.size(), 0.0);
  std::vector<double> dist(geo_ut.size());
  std::vector<double> out;
  for (int d = 1; d <= d_max; ++d) {
    std::size_t t = 0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j, ++t) {
        const double diff = mds.coords(i, d - 1) - mds.coords(j, d - 1);
        sq[t] += diff * diff;
        dist[t] = std::sqrt(sq[t]);
      }
    const double r = pearson(geo_ut, dist);
    out.push_back(1.0 - r * r);
  }
  return out;
}

std::vector<double> residual_curve(const Matrix& geo, int d_max) {
  if (d_max < 1) throw InvalidInput("d_max must be >= 1");
  return residual_curve(geo, classical_mds(geo, d_max));
}

int pick_dimension(std::span<const double> residuals) {
  const auto m = static_cast<int>(residuals.size());
  if (m < 3) throw InvalidInput("pick_dimension needs at least 3 residuals");
  int best = 1;
  double best_val = 0.0;
  for (int d = 2; d <= m - 1; ++d) {
    const double v = residuals[static_cast<std::size_t>(d - 2)] - 2.0 * residuals[static_cast<std::size_t>(d - 1)] +
                     residuals[static_cast<std::size_t>(d)];
    if (v > best_val + 1e-12) {
      best_val = v;
      best = d;
    }
  }
  return best;
}

IsomapResult isomap(const Matrix& distances, const IsomapOptions& opts) {
  const auto n = static_cast<int>(distances.rows());
  if (n < opts.k + 1) {
    throw InvalidInput("Isomap with k=" + std::to_string(opts.k) + " needs at least " +
                       std::to_string(opts.k + 1) + " samples, got " + std::to_string(n));
  }
  if (opts.dims && *opts.dims < 1) throw InvalidInput("embedding dimension must be >= 1");
  if (!opts.dims && opts.d_max < 3) throw InvalidInput("d_max must be >= 3 for the elbow rule");

  IsomapResult r;
  r.graph = knn_graph(distances, opts.k);
  r.geodesics = geodesics(r.graph);
  const int d_max = std::min(std::max(opts.d_max, opts.dims.value_or(1)), n - 1);
  r.mds = classical_mds(r.geodesics, d_max);
  if (r.mds.positive_dims == 0) throw NumericError("Isomap: no positive eigenvalues (all geodesics zero)");
  r.residuals = residual_curve(r.geodesics, r.mds);
  r.d = opts.dims ? *opts.dims : (r.residuals.size() >= 3 ? pick_dimension(r.residuals) : 1);
  r.d = std::min(r.d, r.mds.positive_dims);
  return r;
}

EmbeddingModel build_embedding(const std::vector<SemanticVector>& descriptions, const IsomapOptions& opts) {
  if (descriptions.size() < static_cast<std::size_t>(opts.k) + 1) {
    throw InvalidInput("semantic space with k=" + std::to_string(opts.k) + " needs at least " +
                       std::to_string(opts.k + 1) + " samples, got " + std::to_string(descriptions.size()));
  }
  const Matrix dist = correlation_distance(descriptions);
  if (dist.maxCoeff() == 0.0) {
    throw InvalidInput("all sample descriptions are perfectly correlated (e.g. identical); correlation distances are all zero");
  }
  IsomapResult iso = isomap(dist, opts);

  EmbeddingModel m;
  m.d = iso.d;
  m.coords = iso.mds.coords.leftCols(m.d);
  m.eigenvalues = iso.mds.eigenvalues.head(m.d);
  m.eigenvectors = iso.mds.eigenvectors.leftCols(m.d);
  m.knn_k = iso.graph.k_used;
  m.knn_k_requested = opts.k;
  m.residuals = std::move(iso.residuals);
  m.mean_sq_geodesic = iso.geodesics.array().square().colwise().mean().transpose();
  m.geodesics = std::move(iso.geodesics);
  m.descriptions = descriptions;
  return m;
}

Vector embed_out_of_sample(const EmbeddingModel& model, const SemanticVector& v) {
  const auto n = static_cast<Eigen::Index>(model.size());
  if (model.d < 1 || model.eigenvalues.size() < model.d || !(model.eigenvalues.minCoeff() > 0.0)) {
    throw NumericError("embedding has no retained positive eigenvalues");
  }
  std::vector<double> to_landmark(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    to_landmark[static_cast<std::size_t>(i)] =
        correlation_distance(v.values(), model.descriptions[static_cast<std::size_t>(i)].values());
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(model.knn_k), order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), [&](int a, int b) {
    const double da = to_landmark[static_cast<std::size_t>(a)];
    const double db = to_landmark[static_cast<std::size_t>(b)];
    return da != db ? da < db : a < b;
  });

  Vector geo_sq(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < k; ++t) {
      const int l = order[t];
      best = std::min(best, to_landmark[static_cast<std::size_t>(l)] + model.geodesics(l, i));
    }
    geo_sq[i] = best * best;
  }
  const Vector centered = model.mean_sq_geodesic - geo_sq;
  Vector p(model.d);
  for (int a = 0; a < model.d; ++a) {
    p[a] = model.eigenvectors.col(a).dot(centered) / (2.0 * std::sqrt(model.eigenvalues[a]));
  }
  return p;
}

AxisCorrelations axis_attribute_correlations(const Matrix& coords, const std::vector<SemanticVector>& raw,
                                             double threshold) {
  if (static_cast<std::size_t>(coords.rows()) != raw.size()) {
    throw InvalidInput("axis correlations: coordinate and description counts differ");
  }
  const auto d = static_cast<int>(coords.cols());
  AxisCorrelations out;
  out.table = Matrix::Zero(static_cast<Eigen::Index>(kNumAttributes), d);
  out.above_threshold.resize(static_cast<std::size_t>(d));
  out.attribute_axis.assign(kNumAttributes, std::nullopt);
  std::vector<double> column(raw.size());
  std::vector<double> axis(raw.size());
  for (int a = 0; a < d; ++a) {
    for (std::size_t i = 0; i < raw.size(); ++i) axis[i] = coords(static_cast<Eigen::Index>(i), a);
    for (std::size_t j = 0; j < kNumAttributes; ++j) {
      for (std::size_t i = 0; i < raw.size(); ++i) column[i] = raw[i][j];
      double r = pearson(column, axis);
      // Zero-variance rule: a constant column carries no correlation.
      if (std::all_of(column.begin(), column.end(), [&](double x) { return x == column[0]; })) r = 0.0;
      out.table(static_cast<Eigen::Index>(j), a) = r;
      if (std::abs(r) > threshold) out.above_threshold[static_cast<std::size_t>(a)].push_back(j);
    }
  }
  for (std::size_t j = 0; j < kNumAttributes; ++j) {
    double best = threshold;
    for (int a = 0; a < d; ++a) {
      const double r = std::abs(out.table(static_cast<Eigen::Index>(j), a));
      if (r > best) {
        best = r;
        out.attribute_axis[j] = a;
      }
    }
  }
  return out;
}

std::string axis_label(int axis) {
  static const char* kNames[] = {"X", "Y", "Z"};
  return axis < 3 ? kNames[axis] : "axis" + std::to_string(axis + 1);
}

std::string description_checksum(const SemanticVector& v) {
  std::uint64_t h = kFnvOffset;
  for (double x : v.values()) {
    const auto bits = std::bit_cast<std::uint64_t>(x);
    for (int b = 0; b < 8; ++b) {
      const auto byte = static_cast<std::uint8_t>(bits >> (8 * b));
      h = fnv1a64(std::span<const std::uint8_t>(&byte, 1), h);
    }
  }
  return to_hex(h);
}

namespace {
constexpr const char* kEmbeddingFormat = "semtex-embedding-v1";
}

void save_embedding(const EmbeddingModel& model, const std::filesystem::path& path) {
  json j;
  j["format"] = kEmbeddingFormat;
  j["vocabulary_hash"] = vocabulary_hash_hex();
  j["distance"] = "correlation";
  j["n"] = model.size();
  j["d"] = model.d;
  j["k"] = model.knn_k;
  j["k_requested"] = model.knn_k_requested;
  j["eigenvalues"] = std::vector<double>(model.eigenvalues.data(), model.eigenvalues.data() + model.eigenvalues.size());
  j["residuals"] = model.residuals;
  json coords = json::array();
  for (Eigen::Index i = 0; i < model.coords.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(model.d));
    for (int a = 0; a < model.d; ++a) row[static_cast<std::size_t>(a)] = model.coords(i, a);
    coords.push_back(row);
  }
  j["coords"] = std::move(coords);
  json sums = json::array();
  for (const auto& v : model.descriptions) sums.push_back(description_checksum(v));
  j["description_checksums"] = std::move(sums);
  write_text_file(path, j.dump(1) + "\n");
}

EmbeddingModel load_embedding(const std::filesystem::path& path, const std::vector<SemanticVector>& descriptions) {
  const std::string text = read_text_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidInput(path.string() + ": malformed embedding file (" + e.what() + ")");
  }
  try {
    if (j.at("format").get<std::string>() != kEmbeddingFormat) {
      throw InvalidInput(path.string() + ": unsupported embedding format");
    }
    if (j.at("vocabulary_hash").get<std::string>() != vocabulary_hash_hex()) {
      throw InvalidInput(path.string() + ": attribute vocabulary hash mismatch");
    }
    const auto sums = j.at("description_checksums").get<std::vector<std::string>>();
    if (sums.size() != descriptions.size()) {
      throw InvalidInput(path.string() + ": embedding has " + std::to_string(sums.size()) +
                         " landmarks but the space lists " + std::to_string(descriptions.size()) + " samples");
    }
    for (std::size_t i = 0; i < sums.size(); ++i) {
      if (sums[i] != description_checksum(descriptions[i])) {
        throw InvalidInput(path.string() + ": description checksum mismatch at landmark " + std::to_string(i));
      }
    }
    const int d = j.at("d").get<int>();
    const int k = j.at("k").get<int>();

    IsomapOptions opts;
    opts.k = k;
    opts.dims = d;
    const Matrix dist = correlation_distance(descriptions);
    Graph g = knn_graph_fixed(dist, k);
    if (!g.connected()) throw InvalidInput(path.string() + ": stored k does not give a connected graph");

    EmbeddingModel m;
    m.geodesics = geodesics(g);
    const MdsResult mds = classical_mds(m.geodesics, d);
    if (mds.positive_dims < d) throw NumericError(path.string() + ": recomputed embedding lost dimensions");
    m.d = d;
    m.coords = mds.coords;
    m.eigenvalues = mds.eigenvalues;
    m.eigenvectors = mds.eigenvectors;
    m.knn_k = k;
    m.knn_k_requested = j.value("k_requested", k);
    m.residuals = j.at("residuals").get<std::vector<double>>();
    m.mean_sq_geodesic = m.geodesics.array().square().colwise().mean().transpose();
    m.descriptions = descriptions;

    const auto stored = j.at("coords").get<std::vector<std::vector<double>>>();
    if (stored.size() != descriptions.size()) throw InvalidInput(path.string() + ": coordinate count mismatch");
    for (std::size_t i = 0; i < stored.size(); ++i) {
      if (stored[i].size() != static_cast<std::size_t>(d)) throw InvalidInput(path.string() + ": coordinate width mismatch");
      for (int a = 0; a < d; ++a) {
        const double ref = stored[i][static_cast<std::size_t>(a)];
        if (std::abs(ref - m.coords(static_cast<Eigen::Index>(i), a)) > 1e-6 * std::max(1.0, std::abs(ref))) {
          throw InvalidInput(path.string() + ": stored coordinates do not match the recomputed embedding");
        }
      }
    }
    return m;
  } catch (const json::exception& e) {
    throw InvalidInput(path.string() + ": malformed embedding file (" + e.what() + ")");
  }
}

void write_residuals_csv(const std::filesystem::path& path, std::span<const double> residuals) {
  std::string out = "dimension,residual\n";
  char line[64];
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    std::snprintf(line, sizeof line, "%zu,%.10f\n", i + 1, residuals[i]);
    out += line;
  }
  write_text_file(path, out);
}

}  // namespace semtex::manifold
