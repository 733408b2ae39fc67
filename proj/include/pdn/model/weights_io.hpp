#pragma once

// Weights file layout (all integers little-endian):
//   "PDNW" | u32 version | u32 config length | config text (key=value lines)
//   | u32 CRC-32 of (config text + parameter blob) | f32 parameter blob
// The blob holds weight then bias of every layer in declaration order.

#include <zlib.h>

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "pdn/error.hpp"
#include "pdn/model/config.hpp"
#include "pdn/model/network.hpp"

namespace pdn::model {

inline constexpr char kWeightsMagic[4] = {'P', 'D', 'N', 'W'};
inline constexpr std::uint32_t kWeightsVersion = 1;

struct WeightsHeader {
  NetworkConfig config;
  double peak = 0.0;
};

inline std::string format_config_block(const NetworkConfig& cfg, double peak) {
  std::ostringstream out;
  out << "patch_size=" << cfg.patch_size << '\n';
  out << "skip=" << (cfg.skip ? 1 : 0) << '\n';
  out << "merge=mean\n";
  out << "seed=" << cfg.seed << '\n';
  out << std::setprecision(17) << "peak=" << peak << '\n';
  for (const auto& b : cfg.branches) out << "branch=" << format_branch(b) << '\n';
  return out.str();
}

inline WeightsHeader parse_config_block(const std::string& text) {
  WeightsHeader h;
  h.config.branches.clear();
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UnsupportedFormat("malformed config line: " + line);
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "patch_size") h.config.patch_size = std::stoull(value);
    else if (key == "skip") h.config.skip = value == "1";
    else if (key == "merge") {
      if (value != "mean") throw UnsupportedFormat("unknown merge rule: " + value);
    } else if (key == "seed") h.config.seed = std::stoull(value);
    else if (key == "peak") h.peak = std::stod(value);
    else if (key == "branch") h.config.branches.push_back(parse_branch(value));
    else throw UnsupportedFormat("unknown config key: " + key);
  }
  validate(h.config);
  return h;
}

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline std::uint32_t get_u32(const std::string& in, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  return v;
}

inline std::uint32_t crc32_of(const std::string& a, const std::string& b) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  crc = ::crc32(crc, reinterpret_cast<const Bytef*>(a.data()), static_cast<uInt>(a.size()));
  crc = ::crc32(crc, reinterpret_cast<const Bytef*>(b.data()), static_cast<uInt>(b.size()));
  return static_cast<std::uint32_t>(crc);
}

inline std::string parameter_blob(const Network<float>& net) {
  std::string blob;
  blob.reserve(net.parameter_count() * 4);
  for (const auto& l : net.layers()) {
    for (const auto* vec : {&l.weight, &l.bias}) {
      for (float v : *vec) put_u32(blob, std::bit_cast<std::uint32_t>(v));
    }
  }
  return blob;
}

}  // namespace detail

inline std::string serialize_weights(const Network<float>& net) {
  const std::string config = format_config_block(net.config(), net.peak());
  const std::string blob = detail::parameter_blob(net);
  std::string out(kWeightsMagic, 4);
  detail::put_u32(out, kWeightsVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(config.size()));
  out += config;
  detail::put_u32(out, detail::crc32_of(config, blob));
  out += blob;
  return out;
}

/// Parses a complete weights image; nothing is returned unless the whole
/// file verifies.
inline Network<float> deserialize_weights(const std::string& bytes) {
  if (bytes.size() < 12 || bytes.compare(0, 4, kWeightsMagic, 4) != 0) throw UnsupportedFormat("not a PDNW weights file");
  const std::uint32_t version = detail::get_u32(bytes, 4);
  if (version != kWeightsVersion) {
    throw VersionMismatch("weights format version " + std::to_string(version) + ", expected " +
                          std::to_string(kWeightsVersion));
  }
  const std::uint32_t config_len = detail::get_u32(bytes, 8);
  if (bytes.size() < 12 + static_cast<std::size_t>(config_len) + 4) throw ChecksumError("weights file truncated in header");
  const std::string config = bytes.substr(12, config_len);
  const std::uint32_t stored_crc = detail::get_u32(bytes, 12 + config_len);
  const std::string blob = bytes.substr(16 + config_len);
  if (detail::crc32_of(config, blob) != stored_crc) throw ChecksumError("weights checksum mismatch (file corrupt or truncated)");

  const WeightsHeader header = parse_config_block(config);
  Network<float> net(header.config);
  if (blob.size() != net.parameter_count() * 4) throw ChecksumError("weights blob size does not match configuration");
  std::size_t pos = 0;
  for (auto& l : net.layers()) {
    for (auto* vec : {&l.weight, &l.bias}) {
      for (float& v : *vec) {
        v = std::bit_cast<float>(detail::get_u32(blob, pos));
        pos += 4;
      }
    }
  }
  net.set_peak(header.peak);
  return net;
}

inline void save_weights(const Network<float>& net, const std::filesystem::path& path) {
  const std::string bytes = serialize_weights(net);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write weights: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

inline Network<float> load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound("no such weights file: " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_weights(bytes);
}

/// Loads weights into an existing network whose configuration must match.
inline void load_weights_into(Network<float>& net, const std::filesystem::path& path) {
  Network<float> loaded = load_weights(path);
  if (!(loaded.config() == net.config())) {
    throw ConfigMismatch("weights file configuration differs from the target network");
  }
  net = std::move(loaded);
}

}  // namespace pdn::model
