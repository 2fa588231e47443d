#include "semtex/semspace/space.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <unordered_set>

#include "json.hpp"
#include "semtex/core/attributes.hpp"
#include "semtex/core/error.hpp"
#include "semtex/core/hash.hpp"
#include "semtex/core/image.hpp"
#include "semtex/core/textio.hpp"
#include "semtex/semspace/pipeline.hpp"

namespace semtex::semspace {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

bool all_zero(const SemanticVector& v) {
  return std::all_of(v.values().begin(), v.values().end(), [](double x) { return x == 0.0; });
}

}  // namespace

SemanticSpace build_space(const std::vector<TextureSample>& dataset, const BuildOptions& opts) {
  if (dataset.empty()) throw InvalidInput("cannot build a semantic space from an empty dataset");
  std::unordered_set<std::int64_t> ids;
  std::vector<SemanticVector> descriptions;
  SemanticSpace space;
  space.samples.reserve(dataset.size());
  for (const auto& s : dataset) {
    if (!ids.insert(s.id).second) throw InvalidInput("duplicate sample id " + std::to_string(s.id));
    SpaceSample out{s.id, s.tag, s.semantics, s.image_path};
    if (opts.predictor && (opts.predict_all || all_zero(s.semantics))) {
      if (!s.features) {
        throw InvalidInput("sample " + std::to_string(s.id) + " needs predicted semantics but has no features");
      }
      out.semantics = predict_semantics(*opts.predictor, *s.features, 1.0);
    }
    descriptions.push_back(out.semantics);
    space.samples.push_back(std::move(out));
  }
  space.embedding = manifold::build_embedding(descriptions, opts.isomap);
  return space;
}

Vector embed_query(const SemanticSpace& space, const SemanticVector& query) {
  return manifold::embed_out_of_sample(space.embedding, query);
}

std::vector<Neighbor> top_k(const SemanticSpace& space, const Vector& point, std::size_t k) {
  if (point.size() != space.dimension()) {
    throw InvalidInput("query point has " + std::to_string(point.size()) + " coordinates, space has " +
                       std::to_string(space.dimension()));
  }
  std::vector<Neighbor> all(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    const auto row = space.embedding.coords.row(static_cast<Eigen::Index>(i));
    all[i] = {i, space.samples[i].id, (row.transpose() - point).norm()};
  }
  std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
  });
  // Duplicate descriptions land on the same point only up to rounding, so
  // runs of distances within kTieTolerance count as ties and go by id.
  for (std::size_t lo = 0; lo < all.size();) {
    std::size_t hi = lo + 1;
    while (hi < all.size() && all[hi].distance - all[hi - 1].distance <= kTieTolerance) ++hi;
    if (hi - lo > 1) {
      std::sort(all.begin() + static_cast<std::ptrdiff_t>(lo), all.begin() + static_cast<std::ptrdiff_t>(hi),
                [](const Neighbor& a, const Neighbor& b) { return a.id < b.id; });
    }
    if (hi >= k) break;
    lo = hi;
  }
  all.resize(std::min(k, all.size()));
  return all;
}

Neighbor nearest_neighbor(const SemanticSpace& space, const SemanticVector& query) {
  if (space.size() == 0) throw InvalidInput("semantic space is empty");
  return top_k(space, embed_query(space, query), 1).front();
}

std::uint64_t fresh_seed(std::uint64_t neighbor_seed, const SemanticVector& query) {
  std::uint64_t h = kFnvOffset;
  for (double x : query.values()) {
    const auto bits = std::bit_cast<std::uint64_t>(x);
    h = fnv1a64(std::string_view(reinterpret_cast<const char*>(&bits), sizeof bits), h);
  }
  return splitmix64(neighbor_seed ^ h);
}

GenerationResult generate_from_description(const SemanticSpace& space, const SemanticVector& query,
                                           const GenerateOptions& opts, const procgen::ModelRegistry& registry) {
  if (space.size() == 0) throw InvalidInput("semantic space is empty");
  GenerationResult r;
  r.query_point = embed_query(space, query);
  const Neighbor nb = top_k(space, r.query_point, 1).front();
  const SpaceSample& sample = space.samples[nb.index];
  r.neighbor_id = nb.id;
  r.neighbor_distance = nb.distance;
  r.tag = sample.tag;
  switch (opts.seed_mode) {
    case SeedMode::Fresh:
      r.tag.seed = fresh_seed(sample.tag.seed, query);
      break;
    case SeedMode::Reuse:
      break;
    case SeedMode::Explicit:
      r.tag.seed = opts.seed;
      break;
  }
  try {
    r.image = procgen::generate(r.tag, opts.size, registry);
  } catch (const InvalidInput& e) {
    throw InvalidInput("generating from neighbor " + std::to_string(nb.id) + " (model " + r.tag.model_id +
                       "): " + e.what());
  } catch (const NumericError& e) {
    throw NumericError("generating from neighbor " + std::to_string(nb.id) + " (model " + r.tag.model_id +
                       "): " + e.what());
  }
  return r;
}

double closed_loop_mse(const SemanticVector& query, const TextureImage& image, const ldl::MaxEntModel& predictor,
                       const features::GaborBank& bank) {
  const auto feats = features::extract(image, bank);
  const Distribution pred = ldl::predict(predictor, feats);
  if (pred.size() != kNumAttributes) {
    throw InvalidInput("predictor has " + std::to_string(pred.size()) + " labels, expected " +
                       std::to_string(kNumAttributes));
  }
  const double mass = query.l1_mass();
  double sum = 0.0;
  for (std::size_t j = 0; j < kNumAttributes; ++j) {
    const double diff = pred[j] * mass - query[j];
    sum += diff * diff;
  }
  return sum / static_cast<double>(kNumAttributes);
}

double closed_loop_mse(const SemanticVector& query, const GenerationResult& result, const ldl::MaxEntModel& predictor,
                       const features::GaborBank& bank) {
  return closed_loop_mse(query, result.image, predictor, bank);
}

namespace {

constexpr const char* kSpaceFormat = "semtex-space-v1";

json tag_json(const GenerationTag& tag) {
  return json{{"model_id", tag.model_id}, {"params", tag.params}, {"seed", tag.seed}};
}

GenerationTag tag_from_json(const json& j) {
  return {j.at("model_id").get<std::string>(), j.at("params").get<std::vector<double>>(),
          j.at("seed").get<std::uint64_t>()};
}

}  // namespace

void save_space(const SemanticSpace& space, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create space directory " + dir.string() + ": " + ec.message());
  json samples = json::array();
  for (const auto& s : space.samples) {
    samples.push_back({{"id", s.id},
                       {"tag", tag_json(s.tag)},
                       {"semantics", s.semantics.values()},
                       {"image_path", s.image_path}});
  }
  json j{{"format", kSpaceFormat},
         {"vocabulary_hash", vocabulary_hash_hex()},
         {"d", space.dimension()},
         {"samples", std::move(samples)}};
  write_text_file(dir / kSpaceFile, j.dump() + "\n");
  manifold::save_embedding(space.embedding, dir / kEmbeddingFile);
  manifold::write_residuals_csv(dir / kResidualsFile, space.embedding.residuals);
}

SemanticSpace load_space(const fs::path& dir) {
  const fs::path path = dir / kSpaceFile;
  const std::string text = read_text_file(path);
  SemanticSpace space;
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != kSpaceFormat) throw InvalidInput(path.string() + ": unsupported format");
    if (j.at("vocabulary_hash").get<std::string>() != vocabulary_hash_hex()) {
      throw InvalidInput(path.string() + ": attribute vocabulary hash mismatch");
    }
    for (const auto& s : j.at("samples")) {
      space.samples.push_back({s.at("id").get<std::int64_t>(), tag_from_json(s.at("tag")),
                               SemanticVector::from_span(s.at("semantics").get<std::vector<double>>()),
                               s.value("image_path", std::string())});
    }
  } catch (const json::exception& e) {
    throw InvalidInput(path.string() + ": malformed space file (" + e.what() + ")");
  }
  std::vector<SemanticVector> descriptions;
  descriptions.reserve(space.samples.size());
  for (const auto& s : space.samples) descriptions.push_back(s.semantics);
  space.embedding = manifold::load_embedding(dir / kEmbeddingFile, descriptions);
  return space;
}

SemanticVector query_from_map(const std::map<std::string, double>& values) {
  SemanticVector::Values v{};
  for (const auto& [name, value] : values) {
    const std::size_t j = require_attribute(name);
    if (!(value >= 0.0 && value <= 1.0)) {
      throw InvalidInput("attribute '" + name + "' value " + std::to_string(value) + " is outside [0,1]");
    }
    v[j] = value;
  }
  return SemanticVector(v);
}

SemanticVector parse_query(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("query is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InvalidInput("query must be a JSON object of attribute name to value");
  std::map<std::string, double> values;
  for (const auto& [name, value] : j.items()) {
    require_attribute(name);
    if (!value.is_number()) throw InvalidInput("attribute '" + name + "' value is not a number");
    values[name] = value.get<double>();
  }
  return query_from_map(values);
}

SemanticVector load_query(const fs::path& path) { return parse_query(read_text_file(path)); }

void write_result_bundle(const fs::path& dir, const GenerationResult& result, const SemanticVector& query,
                         std::optional<double> mse) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  write_png(dir / "texture.png", result.image);
  json echo = json::object();
  for (std::size_t j = 0; j < kNumAttributes; ++j) {
    if (query[j] != 0.0) echo[std::string(kAttributeNames[j])] = query[j];
  }
  json p{{"tag", tag_json(result.tag)},
         {"size", result.image.width()},
         {"neighbor_id", result.neighbor_id},
         {"neighbor_distance", result.neighbor_distance},
         {"query_point", std::vector<double>(result.query_point.data(),
                                             result.query_point.data() + result.query_point.size())},
         {"query", std::move(echo)},
         {"image", "texture.png"}};
  if (mse) p["closed_loop_mse"] = *mse;
  write_text_file(dir / "provenance.json", p.dump(2) + "\n");
}

}  // namespace semtex::semspace
