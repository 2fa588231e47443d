#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "semtex/core/types.hpp"

namespace semtex::features {

struct FeatureRow {
  std::int64_t id = 0;
  std::vector<double> values;

  bool operator==(const FeatureRow&) const = default;
};

/// Reads a CSV with header `id,dim_0,...,dim_{D-1}`. Throws IoError with
/// the line number on a malformed row or a column count that disagrees with
/// the header.
std::vector<FeatureRow> ingest_external_features(const std::filesystem::path& path);

void write_feature_csv(const std::filesystem::path& path, std::span<const FeatureRow> rows);

/// Sets samples[i].features from rows matched by id. Throws InvalidInput
/// listing unmatched ids (in either direction).
void attach_features(std::span<const FeatureRow> rows, std::span<TextureSample> samples);

}  // namespace semtex::features
