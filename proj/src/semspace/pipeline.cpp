#include "semtex/semspace/pipeline.hpp"

#include <algorithm>
#include <cstdio>

#include "semtex/core/attributes.hpp"
#include "semtex/core/dataset.hpp"
#include "semtex/core/error.hpp"
#include "semtex/core/image.hpp"

namespace semtex::semspace {

namespace fs = std::filesystem;

std::vector<TextureSample> plan_dataset(const procgen::ModelRegistry& registry, const DatasetSpec& spec) {
  if (spec.n_per_param < 1) throw InvalidInput("n_per_param must be >= 1");
  if (spec.seeds.empty()) throw InvalidInput("at least one seed is required");
  if (spec.size < 1) throw InvalidInput("image size must be >= 1");
  std::vector<const procgen::ModelDescriptor*> models;
  if (spec.models.empty()) {
    for (const auto& m : registry.models()) models.push_back(&m);
  } else {
    for (const auto& id : spec.models) models.push_back(&registry.find(id));
  }

  std::vector<TextureSample> samples;
  std::int64_t next_id = 0;
  char name[32];
  for (const auto* m : models) {
    for (auto& tag : procgen::sample_parameter_grid(*m, spec.n_per_param, spec.seeds)) {
      TextureSample s;
      s.id = next_id++;
      std::snprintf(name, sizeof name, "images/%06lld.png", static_cast<long long>(s.id));
      s.image_path = name;
      s.semantics = procgen::oracle_semantics(*m, tag.params);
      s.tag = std::move(tag);
      samples.push_back(std::move(s));
    }
  }
  return samples;
}

std::vector<TextureSample> build_dataset(const procgen::ModelRegistry& registry, const DatasetSpec& spec,
                                         const fs::path& out_dir, const features::GaborBank* bank) {
  auto samples = plan_dataset(registry, spec);

  std::vector<fs::path> created;
  auto track_dir = [&](const fs::path& d) {
    if (fs::exists(d)) return;
    std::error_code ec;
    fs::create_directories(d, ec);
    if (ec) throw IoError("cannot create " + d.string() + ": " + ec.message());
    created.push_back(d);
  };
  try {
    track_dir(out_dir);
    track_dir(out_dir / "images");
    for (auto& s : samples) {
      const TextureImage img = procgen::generate(s.tag, spec.size, registry);
      const fs::path path = out_dir / s.image_path;
      if (!fs::exists(path)) created.push_back(path);
      write_png(path, img);
      if (bank) s.features = features::extract(img, *bank);
    }
    for (const char* f : {kManifestFile, kAttributesFile})
      if (!fs::exists(out_dir / f)) created.push_back(out_dir / f);
    save_dataset(samples, out_dir);
  } catch (...) {
    std::error_code ec;
    for (auto it = created.rbegin(); it != created.rend(); ++it) fs::remove(*it, ec);
    throw;
  }
  return samples;
}

void compute_features(std::vector<TextureSample>& samples, const fs::path& dataset_dir,
                      const features::GaborBank& bank) {
  for (auto& s : samples) {
    if (s.features) continue;
    s.features = features::extract(read_png(dataset_dir / s.image_path), bank);
  }
}

ldl::TrainingSet training_set(const std::vector<TextureSample>& samples, double epsilon) {
  if (samples.empty()) throw InvalidInput("training set is empty");
  ldl::TrainingSet ts;
  const auto q = samples.front().features ? samples.front().features->size() : 0;
  ts.features.resize(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(q));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (!s.features) throw InvalidInput("sample " + std::to_string(s.id) + " has no features");
    if (s.features->size() != q || q == 0) {
      throw InvalidInput("sample " + std::to_string(s.id) + " has " + std::to_string(s.features->size()) +
                         " features, expected " + std::to_string(q));
    }
    for (std::size_t k = 0; k < q; ++k) ts.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = (*s.features)[k];
    ts.targets.push_back(to_distribution(s.semantics, epsilon));
  }
  return ts;
}

SemanticVector predict_semantics(const ldl::MaxEntModel& model, const std::vector<double>& features, double mass) {
  const Distribution p = ldl::predict(model, features);
  if (p.size() != kNumAttributes) {
    throw InvalidInput("predictor has " + std::to_string(p.size()) + " labels, expected " +
                       std::to_string(kNumAttributes));
  }
  SemanticVector::Values v{};
  for (std::size_t j = 0; j < kNumAttributes; ++j) v[j] = std::clamp(p[j] * mass, 0.0, 1.0);
  return SemanticVector(v);
}

}  // namespace semtex::semspace
