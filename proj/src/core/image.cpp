#include "semtex/core/image.hpp"

#include <png.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "semtex/core/error.hpp"

namespace semtex {

std::array<TextureImage, 4> split_texture(const TextureImage& img) {
  if (img.width() % 2 != 0 || img.height() % 2 != 0 || img.width() == 0 || img.height() == 0) {
    throw InvalidInput("split_texture needs even, nonzero dimensions, got " +
                       std::to_string(img.width()) + "x" + std::to_string(img.height()));
  }
  const int hw = img.width() / 2;
  const int hh = img.height() / 2;
  std::array<TextureImage, 4> tiles;
  for (int t = 0; t < 4; ++t) {
    const int ox = (t % 2) * hw;
    const int oy = (t / 2) * hh;
    std::vector<double> px;
    px.reserve(static_cast<std::size_t>(hw) * hh);
    for (int y = 0; y < hh; ++y)
      for (int x = 0; x < hw; ++x) px.push_back(img.at(ox + x, oy + y));
    tiles[t] = TextureImage(hw, hh, std::move(px));
  }
  return tiles;
}

TextureImage join_tiles(const std::array<TextureImage, 4>& tiles) {
  const int hw = tiles[0].width();
  const int hh = tiles[0].height();
  for (const auto& t : tiles) {
    if (t.width() != hw || t.height() != hh) throw InvalidInput("tiles differ in size");
  }
  std::vector<double> px(static_cast<std::size_t>(4) * hw * hh);
  for (int t = 0; t < 4; ++t) {
    const int ox = (t % 2) * hw;
    const int oy = (t / 2) * hh;
    for (int y = 0; y < hh; ++y)
      for (int x = 0; x < hw; ++x)
        px[static_cast<std::size_t>(oy + y) * (2 * hw) + ox + x] = tiles[t].at(x, y);
  }
  return TextureImage(2 * hw, 2 * hh, std::move(px));
}

namespace {

void png_error_fn(png_structp, png_const_charp msg) { throw IoError(std::string("png: ") + msg); }
void png_warning_fn(png_structp, png_const_charp) {}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}
void png_flush_noop(png_structp) {}

struct ReadCursor {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;
};

void png_read_from_span(png_structp png, png_bytep data, png_size_t length) {
  auto* cur = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cur->pos + length > cur->bytes.size()) throw IoError("png: truncated data");
  std::memcpy(data, cur->bytes.data() + cur->pos, length);
  cur->pos += length;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const TextureImage& img) {
  std::vector<std::uint8_t> out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn,
                                            png_warning_fn);
  if (!png) throw IoError("png: cannot create write struct");
  png_infop info = png_create_info_struct(png);
  std::vector<std::uint8_t> row(static_cast<std::size_t>(img.width()));
  try {
    png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()),
                 static_cast<png_uint_32>(img.height()), 8, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 6);
    png_write_info(png, info);
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x)
        row[x] = static_cast<std::uint8_t>(std::lround(img.at(x, y) * 255.0));
      png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
  } catch (...) {
    png_destroy_write_struct(&png, &info);
    throw;
  }
  png_destroy_write_struct(&png, &info);
  return out;
}

TextureImage decode_png(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw IoError("png: not a PNG stream");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn,
                                           png_warning_fn);
  if (!png) throw IoError("png: cannot create read struct");
  png_infop info = png_create_info_struct(png);
  ReadCursor cursor{bytes, 0};
  int width = 0;
  int height = 0;
  std::vector<double> px;
  try {
    png_set_read_fn(png, &cursor, png_read_from_span);
    png_read_info(png, info);
    const auto color = png_get_color_type(png, info);
    if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8)
      png_set_expand_gray_1_2_4_to_8(png);
    if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA ||
        color == PNG_COLOR_TYPE_PALETTE)
      png_set_rgb_to_gray_fixed(png, 1, -1, -1);
    png_read_update_info(png, info);
    width = static_cast<int>(png_get_image_width(png, info));
    height = static_cast<int>(png_get_image_height(png, info));
    std::vector<std::uint8_t> row(png_get_rowbytes(png, info));
    px.reserve(static_cast<std::size_t>(width) * height);
    for (int y = 0; y < height; ++y) {
      png_read_row(png, row.data(), nullptr);
      for (int x = 0; x < width; ++x) px.push_back(row[x] / 255.0);
    }
  } catch (...) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw;
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return TextureImage(width, height, std::move(px));
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

void write_png(const std::filesystem::path& path, const TextureImage& img) {
  write_file_bytes(path, encode_png(img));
}

TextureImage read_png(const std::filesystem::path& path) { return decode_png(read_file_bytes(path)); }

}  // namespace semtex
