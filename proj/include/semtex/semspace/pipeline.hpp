#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "semtex/core/types.hpp"
#include "semtex/features/gabor.hpp"
#include "semtex/ldl/maxent.hpp"
#include "semtex/procgen/registry.hpp"

namespace semtex::semspace {

struct DatasetSpec {
  int n_per_param = 2;
  std::vector<std::uint64_t> seeds{1};
  int size = 64;
  std::vector<std::string> models;  // empty selects every registered model
};

/// Grid tags in registry order (models, then seeds, then parameters, last
/// parameter fastest); ids count up from 0.
std::vector<TextureSample> plan_dataset(const procgen::ModelRegistry& registry, const DatasetSpec& spec);

/// Renders every planned sample to out_dir/images/<id>.png with oracle
/// semantics and writes the manifest. When a bank is given the Gabor
/// features are stored in the manifest too. Files created by a failed run
/// are removed again.
std::vector<TextureSample> build_dataset(const procgen::ModelRegistry& registry, const DatasetSpec& spec,
                                         const std::filesystem::path& out_dir,
                                         const features::GaborBank* bank = nullptr);

/// Fills sample.features for samples that lack them from their images.
void compute_features(std::vector<TextureSample>& samples, const std::filesystem::path& dataset_dir,
                      const features::GaborBank& bank);

/// Features as rows and oracle semantics as floored distributions. Throws
/// InvalidInput when a sample has no features or dimensions disagree.
ldl::TrainingSet training_set(const std::vector<TextureSample>& samples, double epsilon = kDefaultEpsilon);

/// Predicted description of an image, scaled to the given L1 mass.
SemanticVector predict_semantics(const ldl::MaxEntModel& model, const std::vector<double>& features,
                                 double mass);

}  // namespace semtex::semspace
