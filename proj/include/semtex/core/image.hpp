#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "semtex/core/types.hpp"

namespace semtex {

/// Quadrant tiles in order top-left, top-right, bottom-left, bottom-right.
/// Width and height must be even.
std::array<TextureImage, 4> split_texture(const TextureImage& img);

/// Inverse of split_texture.
TextureImage join_tiles(const std::array<TextureImage, 4>& tiles);

/// 8-bit grayscale PNG; intensity i is stored as round(i * 255). No
/// timestamps or text chunks are written, so equal images give equal bytes.
std::vector<std::uint8_t> encode_png(const TextureImage& img);
TextureImage decode_png(std::span<const std::uint8_t> bytes);

void write_png(const std::filesystem::path& path, const TextureImage& img);
TextureImage read_png(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace semtex
