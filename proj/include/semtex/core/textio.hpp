#pragma once

#include <filesystem>
#include <string>

namespace semtex {

/// Whole-file read; throws IoError naming the path.
std::string read_text_file(const std::filesystem::path& path);

/// Writes to a sibling temporary and renames it into place, so readers
/// never observe a partial file. Throws IoError naming the path.
void write_text_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace semtex
