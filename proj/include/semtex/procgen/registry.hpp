#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semtex/core/types.hpp"

namespace semtex::procgen {

struct ParamSpec {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
};

/// Linear contribution of one normalized parameter to one attribute.
struct Modulator {
  std::size_t param = 0;
  std::size_t attribute = 0;
  double weight = 0.0;
};

struct ModelDescriptor {
  std::string model_id;
  std::vector<ParamSpec> params;
  SemanticVector template_semantics;
  std::vector<Modulator> modulators;

  std::size_t arity() const { return params.size(); }
  std::size_t param_index(std::string_view name) const;
};

/// Parametric texture models, loaded from a JSON registry config (see
/// config/models.json for the key names). Every configured id must have a
/// renderer compiled in, with matching parameter names.
class ModelRegistry {
 public:
  static const ModelRegistry& builtin();
  static ModelRegistry from_json(std::string_view text);
  static ModelRegistry from_file(const std::filesystem::path& path);

  const std::vector<ModelDescriptor>& models() const { return models_; }

  /// Throws InvalidInput naming the unknown id.
  const ModelDescriptor& find(std::string_view model_id) const;

  /// Throws InvalidInput naming the offending field (model_id, arity, or the
  /// out-of-range parameter).
  const ModelDescriptor& validate(const GenerationTag& tag) const;

 private:
  std::vector<ModelDescriptor> models_;
};

std::vector<ModelDescriptor> list_models();

/// Pure function of (tag, size): equal inputs give bit-identical images.
TextureImage generate(const GenerationTag& tag, int size,
                      const ModelRegistry& registry = ModelRegistry::builtin());

/// Endpoint-inclusive evenly spaced grid per parameter, crossed with seeds.
/// n_per_param == 1 selects range midpoints. The last parameter varies
/// fastest, seeds vary slowest.
std::vector<GenerationTag> sample_parameter_grid(const ModelDescriptor& model, int n_per_param,
                                                 std::span<const std::uint64_t> seeds);

/// Maps a parameter from [lo, hi] to [-0.5, 0.5].
double normalize_param(const ParamSpec& spec, double value);

/// clamp(template + sum_p weight * normalized_param_p, 0, 1). Seed-independent.
SemanticVector oracle_semantics(const GenerationTag& tag,
                                const ModelRegistry& registry = ModelRegistry::builtin());
SemanticVector oracle_semantics(const ModelDescriptor& model, std::span<const double> params);

}  // namespace semtex::procgen
