#include "semtex/core/dataset.hpp"

#include <fstream>
#include <unordered_set>

#include "json.hpp"
#include "semtex/core/error.hpp"

namespace semtex {

namespace fs = std::filesystem;
using nlohmann::json;

std::string manifest_record(const TextureSample& s) {
  json j;
  j["id"] = s.id;
  j["image_path"] = s.image_path;
  j["model_id"] = s.tag.model_id;
  j["params"] = s.tag.params;
  j["seed"] = s.tag.seed;
  j["semantics"] = s.semantics.values();
  if (s.features) j["features"] = *s.features;
  return j.dump();
}

TextureSample parse_manifest_record(const std::string& line) {
  json j = json::parse(line);
  TextureSample s;
  s.id = j.at("id").get<std::int64_t>();
  s.image_path = j.at("image_path").get<std::string>();
  s.tag.model_id = j.at("model_id").get<std::string>();
  s.tag.params = j.at("params").get<std::vector<double>>();
  s.tag.seed = j.at("seed").get<std::uint64_t>();
  s.semantics = SemanticVector::from_span(j.at("semantics").get<std::vector<double>>());
  if (j.contains("features")) s.features = j["features"].get<std::vector<double>>();
  return s;
}

void save_dataset(std::span<const TextureSample> samples, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create dataset directory " + dir.string() + ": " + ec.message());

  std::ofstream manifest(dir / kManifestFile, std::ios::trunc);
  if (!manifest) throw IoError("cannot write " + (dir / kManifestFile).string());
  for (const auto& s : samples) manifest << manifest_record(s) << '\n';
  if (!manifest) throw IoError("write failed for " + (dir / kManifestFile).string());

  std::ofstream attrs(dir / kAttributesFile, std::ios::trunc);
  if (!attrs) throw IoError("cannot write " + (dir / kAttributesFile).string());
  for (auto name : kAttributeNames) attrs << name << '\n';
}

std::vector<TextureSample> load_dataset(const fs::path& dir) {
  std::ifstream manifest(dir / kManifestFile);
  if (!manifest) throw IoError("cannot open " + (dir / kManifestFile).string());

  std::vector<TextureSample> samples;
  std::string line;
  std::size_t line_no = 0;
  std::unordered_set<std::int64_t> seen;
  while (std::getline(manifest, line)) {
    ++line_no;
    if (line.empty()) continue;
    TextureSample s;
    try {
      s = parse_manifest_record(line);
    } catch (const json::exception& e) {
      throw IoError("manifest line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!fs::exists(dir / s.image_path)) {
      throw IoError("sample " + std::to_string(s.id) + ": image " + s.image_path + " not found");
    }
    if (!seen.insert(s.id).second) {
      throw InvalidInput("manifest line " + std::to_string(line_no) + ": duplicate sample id " +
                         std::to_string(s.id));
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace semtex
