#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "semtex/features/gabor.hpp"
#include "semtex/ldl/maxent.hpp"
#include "semtex/manifold/isomap.hpp"
#include "semtex/procgen/registry.hpp"
#include "semtex/semspace/space.hpp"

namespace semtex::api {

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

inline constexpr int kDefaultImageSize = 128;
inline constexpr int kMinImageSize = 32;  // must cover the Gabor kernel
inline constexpr int kMaxImageSize = 1024;
inline constexpr int kDefaultTopK = 5;
inline constexpr int kMaxTopK = 100;

/// Content-addressed id of a rendered texture: FNV-1a over model id,
/// parameter bit patterns, seed and size.
std::string texture_id(const GenerationTag& tag, int size);

/// Generated PNGs by id. Append-only; with a directory, each image is also
/// written there atomically and served from disk after a restart.
class ImageStore {
 public:
  explicit ImageStore(std::optional<std::filesystem::path> dir = std::nullopt);
  void put(const std::string& id, std::vector<std::uint8_t> png);
  std::optional<std::vector<std::uint8_t>> get(const std::string& id) const;

 private:
  std::optional<std::filesystem::path> dir_;
  mutable std::mutex mu_;
  std::map<std::string, std::vector<std::uint8_t>> images_;
};

/// Request handling over read-only artifacts. Handlers never throw; errors
/// become 400/404/500 JSON bodies of the form {"error": "..."}.
class Service {
 public:
  /// Throws InvalidInput when the predictor is not a 43-label model over
  /// the bank's feature dimension.
  Service(semspace::SemanticSpace space, ldl::MaxEntModel predictor,
          features::GaborBank bank = features::GaborBank::build(),
          std::optional<std::filesystem::path> image_dir = std::nullopt,
          const procgen::ModelRegistry& registry = procgen::ModelRegistry::builtin());

  /// GET /api/attributes
  Response attributes() const;
  /// POST /api/generate with {"attributes": {name: value}, "size"?, "top_k"?,
  /// "seed"?, "reuse_seed"?}
  Response generate(const std::string& body);
  /// GET /api/texture/{id}.png
  Response texture(const std::string& id) const;
  /// GET /api/health
  Response health() const;

  std::uint64_t request_count() const { return requests_.load(); }
  const semspace::SemanticSpace& space() const { return space_; }

 private:
  semspace::SemanticSpace space_;
  ldl::MaxEntModel predictor_;
  features::GaborBank bank_;
  const procgen::ModelRegistry& registry_;
  manifold::AxisCorrelations axes_;
  std::string attributes_body_;
  ImageStore store_;
  mutable std::atomic<std::uint64_t> requests_{0};
};

}  // namespace semtex::api
