#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "semtex/core/types.hpp"

namespace semtex {

inline constexpr const char* kManifestFile = "manifest.jsonl";
inline constexpr const char* kAttributesFile = "attributes.txt";
inline constexpr const char* kFeaturesFile = "features.csv";

/// Writes manifest.jsonl (one JSON record per sample) and attributes.txt
/// into dir. Images are not written here; image_path is relative to dir.
void save_dataset(std::span<const TextureSample> samples, const std::filesystem::path& dir);

/// Reads manifest.jsonl. Throws IoError naming the sample id when a
/// referenced image is missing.
std::vector<TextureSample> load_dataset(const std::filesystem::path& dir);

/// One manifest line, without trailing newline.
std::string manifest_record(const TextureSample& sample);
TextureSample parse_manifest_record(const std::string& line);

}  // namespace semtex
