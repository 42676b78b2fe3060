#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <png.h>

#include "facade/error.hpp"
#include "facade/grid.hpp"
#include "facade/labelmap.hpp"

namespace facade {

/// Reads any PNG as 8-bit RGB. Alpha is dropped (composited on black).
inline FacadeImage read_png(const std::filesystem::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw Error(ErrorCode::IoError, "cannot read PNG " + path.string() + ": " + msg);
  }
  img.format = PNG_FORMAT_RGB;
  const int width = int(img.width);
  const int height = int(img.height);
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, buffer.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw Error(ErrorCode::IoError, "cannot decode PNG " + path.string() + ": " + msg);
  }
  FacadeImage out(width, height);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.data()[i] = {buffer[3 * i], buffer[3 * i + 1], buffer[3 * i + 2]};
  }
  return out;
}

inline void write_png(const std::filesystem::path& path, const FacadeImage& image) {
  std::vector<png_byte> buffer(image.size() * 3);
  for (std::size_t i = 0; i < image.size(); ++i) {
    buffer[3 * i] = image.data()[i].r;
    buffer[3 * i + 1] = image.data()[i].g;
    buffer[3 * i + 2] = image.data()[i].b;
  }
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = png_uint_32(image.width());
  img.height = png_uint_32(image.height());
  img.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&img, path.c_str(), 0, buffer.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw Error(ErrorCode::IoError, "cannot write PNG " + path.string() + ": " + msg);
  }
}

inline LabelMap read_labelmap(const std::filesystem::path& path, const ClassPalette& palette,
                              const DecodeOptions& options = {}) {
  return decode_labelmap(read_png(path), palette, options);
}

inline void write_labelmap(const std::filesystem::path& path, const LabelMap& map,
                           const ClassPalette& palette) {
  write_png(path, encode_labelmap(map, palette));
}

}  // namespace facade
