#pragma once

// PGM (P5) and PNG grayscale I/O. PNG goes through libpng's simplified API.

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "pdn/error.hpp"
#include "pdn/image.hpp"

namespace pdn::io {

// ITU-R BT.601 luma weights.
inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

inline double luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return kLumaR * r + kLumaG * g + kLumaB * b;
}

/// Byte a pixel is stored as: scaled by 255/peak, clamped, rounded half up.
inline std::uint8_t quantize(double value, double peak) {
  const double scaled = std::clamp(value * (255.0 / peak), 0.0, 255.0);
  return static_cast<std::uint8_t>(std::floor(scaled + 0.5));
}

/// The image save_grayscale() actually stores, at peak 255.
inline Image quantized(const Image& img) {
  std::vector<double> px(img.size());
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = quantize(img.pixels()[i], img.peak());
  return Image(img.width(), img.height(), std::move(px), 255.0);
}

namespace detail {

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) throw FileNotFound("no such file: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline bool has_png_signature(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t kSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  return bytes.size() >= 8 && std::equal(kSig, kSig + 8, bytes.begin());
}

// Parses the next unsigned decimal header token, skipping whitespace and comments.
inline std::size_t pgm_header_value(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    if (bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(bytes[pos])) {
      ++pos;
    } else {
      break;
    }
  }
  if (pos >= bytes.size()) throw TruncatedData("PGM header ends early");
  if (!std::isdigit(bytes[pos])) throw UnsupportedFormat("malformed PGM header");
  std::size_t value = 0;
  while (pos < bytes.size() && std::isdigit(bytes[pos])) {
    value = value * 10 + (bytes[pos] - '0');
    if (value > (1u << 30)) throw UnsupportedFormat("PGM header value out of range");
    ++pos;
  }
  return value;
}

inline Image decode_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') throw UnsupportedFormat("not a PGM/PNG file");
  if (bytes[1] != '5') throw UnsupportedFormat("only binary PGM (P5) is supported");
  std::size_t pos = 2;
  const std::size_t width = pgm_header_value(bytes, pos);
  const std::size_t height = pgm_header_value(bytes, pos);
  const std::size_t maxval = pgm_header_value(bytes, pos);
  if (width == 0 || height == 0) throw UnsupportedFormat("PGM has zero dimension");
  if (maxval == 0 || maxval > 255) throw UnsupportedFormat("unsupported PGM bit depth (maxval " + std::to_string(maxval) + ")");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw TruncatedData("PGM header ends early");
  ++pos;
  const std::size_t count = width * height;
  if (bytes.size() - pos < count) throw TruncatedData("PGM raster truncated");
  std::vector<double> px(count);
  const double scale = 255.0 / static_cast<double>(maxval);
  for (std::size_t i = 0; i < count; ++i) {
    px[i] = maxval == 255 ? static_cast<double>(bytes[pos + i]) : std::min(255.0, bytes[pos + i] * scale);
  }
  return Image(width, height, std::move(px), 255.0);
}

inline Image decode_png(std::span<const std::uint8_t> bytes) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw TruncatedData("PNG header unreadable: " + msg);
  }
  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    throw UnsupportedFormat("unsupported PNG bit depth (16-bit)");
  }
  if (image.format & PNG_FORMAT_FLAG_ALPHA) {
    png_image_free(&image);
    throw UnsupportedFormat("unsupported PNG color type (alpha channel)");
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const std::size_t width = image.width;
  const std::size_t height = image.height;
  std::vector<std::uint8_t> raw(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, raw.data(), 0, nullptr)) {
    const std::string msg = image.message;
    png_image_free(&image);
    throw TruncatedData("PNG data truncated or corrupt: " + msg);
  }
  std::vector<double> px(width * height);
  for (std::size_t i = 0; i < px.size(); ++i) {
    px[i] = color ? luma(raw[3 * i], raw[3 * i + 1], raw[3 * i + 2]) : static_cast<double>(raw[i]);
  }
  return Image(width, height, std::move(px), 255.0);
}

inline bool wants_png(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png";
}

}  // namespace detail

/// Decodes an in-memory PGM (P5) or PNG stream into a peak-255 image.
inline Image decode_grayscale(std::span<const std::uint8_t> bytes) {
  return detail::has_png_signature(bytes) ? detail::decode_png(bytes) : detail::decode_pgm(bytes);
}

inline Image load_grayscale(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  return decode_grayscale(bytes);
}

inline std::vector<std::uint8_t> encode_pgm(const Image& img) {
  const std::string header =
      "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + img.size());
  for (double v : img.pixels()) out.push_back(quantize(v, img.peak()));
  return out;
}

/// Writes PNG when the extension is .png, binary PGM otherwise.
inline void save_grayscale(const Image& img, const std::filesystem::path& path) {
  if (detail::wants_png(path)) {
    std::vector<std::uint8_t> raw(img.size());
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = quantize(img.pixels()[i], img.peak());
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&image, path.c_str(), 0, raw.data(), 0, nullptr)) {
      const std::string msg = image.message;
      png_image_free(&image);
      throw IoError("cannot write " + path.string() + ": " + msg);
    }
    return;
  }
  const auto bytes = encode_pgm(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace pdn::io
