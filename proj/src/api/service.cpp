#include "semtex/api/service.hpp"

#include <bit>
#include <cmath>

#include "json.hpp"
#include "semtex/core/attributes.hpp"
#include "semtex/core/error.hpp"
#include "semtex/core/hash.hpp"
#include "semtex/core/image.hpp"
#include "semtex/core/textio.hpp"

namespace semtex::api {

namespace fs = std::filesystem;
using nlohmann::json;

std::string texture_id(const GenerationTag& tag, int size) {
  std::uint64_t h = fnv1a64(tag.model_id);
  auto mix = [&h](std::uint64_t v) {
    h = fnv1a64(std::string_view(reinterpret_cast<const char*>(&v), sizeof v), h);
  };
  mix(tag.params.size());
  for (double p : tag.params) mix(std::bit_cast<std::uint64_t>(p));
  mix(tag.seed);
  mix(static_cast<std::uint64_t>(size));
  return to_hex(h);
}

ImageStore::ImageStore(std::optional<fs::path> dir) : dir_(std::move(dir)) {
  if (dir_) {
    std::error_code ec;
    fs::create_directories(*dir_, ec);
    if (ec) throw IoError("cannot create image directory " + dir_->string() + ": " + ec.message());
  }
}

void ImageStore::put(const std::string& id, std::vector<std::uint8_t> png) {
  std::lock_guard lock(mu_);
  if (images_.count(id)) return;
  if (dir_) write_text_file(*dir_ / (id + ".png"), std::string(png.begin(), png.end()));
  images_.emplace(id, std::move(png));
}

std::optional<std::vector<std::uint8_t>> ImageStore::get(const std::string& id) const {
  std::lock_guard lock(mu_);
  if (auto it = images_.find(id); it != images_.end()) return it->second;
  if (dir_) {
    const fs::path p = *dir_ / (id + ".png");
    std::error_code ec;
    if (fs::is_regular_file(p, ec)) return read_file_bytes(p);
  }
  return std::nullopt;
}

namespace {

Response json_response(int status, const json& body) { return {status, "application/json", body.dump()}; }

Response error_response(int status, const std::string& message) {
  return json_response(status, json{{"error", message}});
}

json tag_json(const GenerationTag& tag) {
  return json{{"model_id", tag.model_id}, {"params", tag.params}, {"seed", tag.seed}};
}

bool valid_id(const std::string& id) {
  if (id.empty() || id.size() > 32) return false;
  for (char ch : id)
    if (!((ch >= '0' && ch <= '9') || (ch >= 'a' && ch <= 'f'))) return false;
  return true;
}

int int_field(const json& body, const char* key, int fallback, int lo, int hi) {
  if (!body.contains(key)) return fallback;
  const json& v = body.at(key);
  if (!v.is_number_integer()) throw InvalidInput(std::string("'") + key + "' must be an integer");
  const auto x = v.get<long long>();
  if (x < lo || x > hi) {
    throw InvalidInput(std::string("'") + key + "' must be in [" + std::to_string(lo) + ", " +
                       std::to_string(hi) + "], got " + std::to_string(x));
  }
  return static_cast<int>(x);
}

}  // namespace

Service::Service(semspace::SemanticSpace space, ldl::MaxEntModel predictor, features::GaborBank bank,
                 std::optional<fs::path> image_dir, const procgen::ModelRegistry& registry)
    : space_(std::move(space)),
      predictor_(std::move(predictor)),
      bank_(std::move(bank)),
      registry_(registry),
      store_(std::move(image_dir)) {
  predictor_.validate();
  if (predictor_.num_labels() != kNumAttributes) {
    throw InvalidInput("predictor has " + std::to_string(predictor_.num_labels()) + " labels, expected " +
                       std::to_string(kNumAttributes));
  }
  if (predictor_.feature_dim() != bank_.feature_dim()) {
    throw InvalidInput("predictor expects " + std::to_string(predictor_.feature_dim()) +
                       " features but the Gabor bank produces " + std::to_string(bank_.feature_dim()));
  }
  if (space_.size() == 0) throw InvalidInput("semantic space is empty");
  for (const auto& s : space_.samples) registry_.validate(s.tag);

  std::vector<SemanticVector> raw;
  raw.reserve(space_.size());
  for (const auto& s : space_.samples) raw.push_back(s.semantics);
  axes_ = manifold::axis_attribute_correlations(space_.embedding.coords, raw);

  json list = json::array();
  for (std::size_t j = 0; j < kNumAttributes; ++j) {
    json entry{{"index", j}, {"name", kAttributeNames[j]}};
    const auto axis = axes_.attribute_axis[j];
    entry["axis"] = axis ? json(manifold::axis_label(*axis)) : json(nullptr);
    entry["correlation"] = axis ? axes_.table(static_cast<Eigen::Index>(j), *axis) : 0.0;
    list.push_back(std::move(entry));
  }
  attributes_body_ = json{{"attributes", std::move(list)},
                          {"vocabulary_hash", vocabulary_hash_hex()},
                          {"dimension", space_.dimension()},
                          {"threshold", manifold::kAxisThreshold}}
                         .dump();
}

Response Service::attributes() const {
  ++requests_;
  return {200, "application/json", attributes_body_};
}

Response Service::health() const {
  ++requests_;
  return json_response(200, json{{"status", "ok"},
                                 {"samples", space_.size()},
                                 {"dimension", space_.dimension()},
                                 {"requests", requests_.load()}});
}

Response Service::generate(const std::string& body) {
  ++requests_;
  json req;
  try {
    req = json::parse(body);
  } catch (const json::exception& e) {
    return error_response(400, std::string("request body is not valid JSON: ") + e.what());
  }

  SemanticVector query;
  semspace::GenerateOptions opts;
  int top_k = kDefaultTopK;
  try {
    if (!req.is_object()) throw InvalidInput("request body must be a JSON object");
    for (const auto& [key, value] : req.items()) {
      if (key != "attributes" && key != "size" && key != "top_k" && key != "seed" && key != "reuse_seed") {
        throw InvalidInput("unknown request field '" + key + "'");
      }
    }
    if (!req.contains("attributes") || !req["attributes"].is_object()) {
      throw InvalidInput("'attributes' must be an object of attribute name to value");
    }
    std::map<std::string, double> values;
    for (const auto& [name, value] : req["attributes"].items()) {
      require_attribute(name);
      if (!value.is_number()) throw InvalidInput("attribute '" + name + "' value is not a number");
      values[name] = value.get<double>();
    }
    query = semspace::query_from_map(values);
    opts.size = int_field(req, "size", kDefaultImageSize, kMinImageSize, kMaxImageSize);
    top_k = int_field(req, "top_k", kDefaultTopK, 1, kMaxTopK);
    if (req.contains("seed")) {
      if (!req["seed"].is_number_unsigned()) throw InvalidInput("'seed' must be a nonnegative integer");
      opts.seed_mode = semspace::SeedMode::Explicit;
      opts.seed = req["seed"].get<std::uint64_t>();
    }
    if (req.contains("reuse_seed")) {
      if (!req["reuse_seed"].is_boolean()) throw InvalidInput("'reuse_seed' must be a boolean");
      if (req["reuse_seed"].get<bool>()) {
        if (req.contains("seed")) throw InvalidInput("'seed' and 'reuse_seed' are mutually exclusive");
        opts.seed_mode = semspace::SeedMode::Reuse;
      }
    }
  } catch (const InvalidInput& e) {
    return error_response(400, e.what());
  }

  try {
    const auto result = semspace::generate_from_description(space_, query, opts, registry_);
    const double mse = semspace::closed_loop_mse(query, result, predictor_, bank_);
    const std::string id = texture_id(result.tag, opts.size);
    store_.put(id, encode_png(result.image));

    json neighbors = json::array();
    for (const auto& nb : semspace::top_k(space_, result.query_point, static_cast<std::size_t>(top_k))) {
      neighbors.push_back(
          {{"id", nb.id}, {"distance", nb.distance}, {"tag", tag_json(space_.samples[nb.index].tag)}});
    }
    return json_response(
        200, json{{"image_id", id},
                  {"image_url", "/api/texture/" + id + ".png"},
                  {"tag", tag_json(result.tag)},
                  {"size", opts.size},
                  {"neighbor_id", result.neighbor_id},
                  {"neighbor_distance", result.neighbor_distance},
                  {"query_point", std::vector<double>(result.query_point.data(),
                                                      result.query_point.data() + result.query_point.size())},
                  {"neighbors", std::move(neighbors)},
                  {"closed_loop_mse", mse}});
  } catch (const std::exception& e) {
    return error_response(500, std::string("generation failed: ") + e.what());
  }
}

Response Service::texture(const std::string& id) const {
  ++requests_;
  if (!valid_id(id)) return error_response(404, "unknown texture id '" + id + "'");
  try {
    auto png = store_.get(id);
    if (!png) return error_response(404, "unknown texture id '" + id + "'");
    return {200, "image/png", std::string(png->begin(), png->end())};
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

}  // namespace semtex::api
