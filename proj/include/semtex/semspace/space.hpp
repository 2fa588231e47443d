#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semtex/core/types.hpp"
#include "semtex/features/gabor.hpp"
#include "semtex/ldl/maxent.hpp"
#include "semtex/manifold/isomap.hpp"
#include "semtex/procgen/registry.hpp"

namespace semtex::semspace {

using Vector = Eigen::VectorXd;

struct SpaceSample {
  std::int64_t id = 0;
  GenerationTag tag;
  SemanticVector semantics;  // the description that was embedded
  std::string image_path;    // relative to the dataset directory, may be empty
};

/// Embedding of every sample description plus the tags retrieval returns.
/// Row i of embedding.coords belongs to samples[i].
struct SemanticSpace {
  manifold::EmbeddingModel embedding;
  std::vector<SpaceSample> samples;

  std::size_t size() const { return samples.size(); }
  int dimension() const { return embedding.d; }
  Vector coord(std::size_t i) const { return embedding.coords.row(static_cast<Eigen::Index>(i)).transpose(); }
};

struct BuildOptions {
  manifold::IsomapOptions isomap;
  /// With a predictor, samples whose description is all zero are described
  /// by the predictor instead; predict_all replaces every description.
  const ldl::MaxEntModel* predictor = nullptr;
  bool predict_all = false;
};

/// Predicted descriptions need sample.features. Throws InvalidInput for
/// fewer than k+1 samples, duplicate ids, identical descriptions, or a
/// sample that needs prediction but has no features.
SemanticSpace build_space(const std::vector<TextureSample>& dataset, const BuildOptions& opts = {});

struct Neighbor {
  std::size_t index = 0;
  std::int64_t id = 0;
  double distance = 0.0;
};

/// Query point in the space (out-of-sample projection).
Vector embed_query(const SemanticSpace& space, const SemanticVector& query);

/// Distances closer than this are treated as equal when ranking.
inline constexpr double kTieTolerance = 1e-10;

/// k closest samples by Euclidean distance in the space, ascending, ties by
/// smallest sample id. k is clamped to the sample count.
std::vector<Neighbor> top_k(const SemanticSpace& space, const Vector& point, std::size_t k);
Neighbor nearest_neighbor(const SemanticSpace& space, const SemanticVector& query);

enum class SeedMode {
  Fresh,     // derived from the neighbor seed and the query, so a new texture
  Reuse,     // the neighbor's own seed: reproduces the stored image
  Explicit,  // GenerateOptions::seed
};

struct GenerateOptions {
  int size = 128;
  SeedMode seed_mode = SeedMode::Fresh;
  std::uint64_t seed = 0;
};

struct GenerationResult {
  TextureImage image;
  GenerationTag tag;
  std::int64_t neighbor_id = 0;
  double neighbor_distance = 0.0;
  Vector query_point;
};

/// splitmix64(neighbor seed ^ hash of the query's bit pattern).
std::uint64_t fresh_seed(std::uint64_t neighbor_seed, const SemanticVector& query);

/// Retrieves the nearest sample and renders its model and parameters.
/// Render failures are rethrown with the neighbor id and tag in the message.
GenerationResult generate_from_description(const SemanticSpace& space, const SemanticVector& query,
                                           const GenerateOptions& opts = {},
                                           const procgen::ModelRegistry& registry =
                                               procgen::ModelRegistry::builtin());

/// Mean squared error over the 43 attributes between the query and the
/// predicted description of the rendered image, the prediction scaled by the
/// query's L1 mass.
double closed_loop_mse(const SemanticVector& query, const TextureImage& image, const ldl::MaxEntModel& predictor,
                       const features::GaborBank& bank);
double closed_loop_mse(const SemanticVector& query, const GenerationResult& result,
                       const ldl::MaxEntModel& predictor, const features::GaborBank& bank);

inline constexpr const char* kSpaceFile = "space.json";
inline constexpr const char* kEmbeddingFile = "embedding.json";
inline constexpr const char* kResidualsFile = "residuals.csv";

/// space.json (samples and tags), embedding.json and residuals.csv in dir.
void save_space(const SemanticSpace& space, const std::filesystem::path& dir);
/// Throws IoError for missing files and InvalidInput for inconsistent ones.
SemanticSpace load_space(const std::filesystem::path& dir);

/// Attribute name -> value in [0, 1]; absent attributes are 0. Throws
/// InvalidInput naming an unknown attribute or an out-of-range value.
SemanticVector query_from_map(const std::map<std::string, double>& values);
/// JSON object of attribute name -> number.
SemanticVector parse_query(std::string_view json_text);
SemanticVector load_query(const std::filesystem::path& path);

/// PNG plus provenance.json: tag, neighbor, distance, query point, query
/// echo and the closed-loop MSE when given.
void write_result_bundle(const std::filesystem::path& dir, const GenerationResult& result,
                         const SemanticVector& query, std::optional<double> mse);

}  // namespace semtex::semspace
