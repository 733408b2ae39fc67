#pragma once

// Training datasets of (noisy, clean) patch pairs and their on-disk form: a
// plain-text manifest plus a little-endian float32 blob.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "pdn/error.hpp"
#include "pdn/image.hpp"
#include "pdn/log.hpp"
#include "pdn/noise_vst.hpp"
#include "pdn/patchwork.hpp"
#include "pdn/random.hpp"

namespace pdn {

enum class Split : std::uint8_t { kTrain, kValidation };

inline const char* split_name(Split s) { return s == Split::kTrain ? "train" : "val"; }

struct PatchRecord {
  std::string source;
  Anchor anchor;
  Split split = Split::kTrain;
  friend bool operator==(const PatchRecord&, const PatchRecord&) = default;
};

/// Number of items assigned to training: floor(n * fraction).
inline std::size_t train_count(std::size_t n, double fraction) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw InvalidArgument("train fraction must be in [0, 1]");
  // long double keeps e.g. 724544 * 0.8 = 579635.2 from rounding across an integer.
  return static_cast<std::size_t>(std::floor(static_cast<long double>(n) * static_cast<long double>(fraction) + 1e-9L));
}

/// Seeded shuffle; the first train_count(n) positions of the permutation train.
inline std::vector<Split> assign_splits(std::size_t n, double fraction, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  CounterRng rng(seed, RngDomain::kSplit);
  shuffle(std::span<std::size_t>(order), rng);
  std::vector<Split> out(n, Split::kValidation);
  const std::size_t n_train = train_count(n, fraction);
  for (std::size_t i = 0; i < n_train; ++i) out[order[i]] = Split::kTrain;
  return out;
}

struct PatchDataset {
  std::size_t patch_size = 0;
  double peak = 1.0;
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
  std::vector<PatchRecord> records;
  // Record i occupies [i*P*P, (i+1)*P*P); values normalized by peak.
  std::vector<float> inputs;
  std::vector<float> targets;

  std::size_t size() const noexcept { return records.size(); }
  std::size_t patch_elems() const noexcept { return patch_size * patch_size; }
  std::span<const float> input(std::size_t i) const { return {inputs.data() + i * patch_elems(), patch_elems()}; }
  std::span<const float> target(std::size_t i) const { return {targets.data() + i * patch_elems(), patch_elems()}; }

  std::vector<std::size_t> indices(Split which) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (records[i].split == which) out.push_back(i);
    }
    return out;
  }

  void push(const std::string& source, Anchor at, std::span<const double> noisy, std::span<const double> clean) {
    records.push_back({source, at, Split::kTrain});
    for (double v : noisy) inputs.push_back(static_cast<float>(v / peak));
    for (double v : clean) targets.push_back(static_cast<float>(v / peak));
  }
};

struct SourceImage {
  std::string id;
  Image image;
};

struct DatasetOptions {
  std::size_t patch_size = 64;
  std::size_t patches_per_image = 64;
  double peak = 4.0;
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
};

/// Scales each source to the peak, corrupts it, samples random anchors and
/// stores peak-normalized (noisy, clean) pairs. Undersized sources are
/// skipped with a warning.
inline PatchDataset build_dataset(const std::vector<SourceImage>& sources, const DatasetOptions& opt) {
  PatchDataset ds;
  ds.patch_size = opt.patch_size;
  ds.peak = opt.peak;
  ds.seed = opt.seed;
  ds.train_fraction = opt.train_fraction;
  for (std::size_t s = 0; s < sources.size(); ++s) {
    const Image& img = sources[s].image;
    if (img.width() < opt.patch_size || img.height() < opt.patch_size) {
      warn("skipping " + sources[s].id + ": smaller than " + std::to_string(opt.patch_size) + " pixels");
      continue;
    }
    const Image clean = scale_to_peak(img, opt.peak);
    const Image noisy = corrupt_image(clean, NoiseSeed{derive_seed(opt.seed, s)});
    CounterRng rng(opt.seed, RngDomain::kPatchSampling, s);
    for (const Anchor& a : sample_anchors(img.height(), img.width(), opt.patches_per_image, opt.patch_size, rng)) {
      ds.push(sources[s].id, a, copy_patch(noisy, a, opt.patch_size), copy_patch(clean, a, opt.patch_size));
    }
  }
  const auto splits = assign_splits(ds.size(), opt.train_fraction, opt.seed);
  for (std::size_t i = 0; i < ds.size(); ++i) ds.records[i].split = splits[i];
  return ds;
}

// ---------------------------------------------------------------------------
// Manifest and blob

inline constexpr const char* kManifestMagic = "# pdn-dataset 1";

struct ManifestHeader {
  std::size_t patch_size = 0;
  double peak = 1.0;
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
};

inline std::string format_manifest(const ManifestHeader& h, const std::vector<PatchRecord>& records) {
  std::ostringstream out;
  out << kManifestMagic << '\n';
  out << std::setprecision(17) << "# patch_size=" << h.patch_size << " peak=" << h.peak << " seed=" << h.seed
      << " train_fraction=" << h.train_fraction << " count=" << records.size() << '\n';
  out << "# source\trow\tcol\tsplit\n";
  for (const auto& r : records) {
    out << r.source << '\t' << r.anchor.row << '\t' << r.anchor.col << '\t' << split_name(r.split) << '\n';
  }
  return out.str();
}

struct Manifest {
  ManifestHeader header;
  std::vector<PatchRecord> records;
};

inline Manifest parse_manifest(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kManifestMagic) throw UnsupportedFormat("not a pdn dataset manifest");
  Manifest m;
  std::size_t declared = 0;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) throw TruncatedData("manifest header missing");
  {
    std::istringstream fields(line.substr(2));
    std::string kv;
    while (fields >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = kv.substr(0, eq);
      const std::string value = kv.substr(eq + 1);
      if (key == "patch_size") m.header.patch_size = std::stoull(value);
      else if (key == "peak") m.header.peak = std::stod(value);
      else if (key == "seed") m.header.seed = std::stoull(value);
      else if (key == "train_fraction") m.header.train_fraction = std::stod(value);
      else if (key == "count") declared = std::stoull(value);
    }
  }
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    PatchRecord r;
    std::string split;
    if (!std::getline(fields, r.source, '\t') || !(fields >> r.anchor.row >> r.anchor.col >> split)) {
      throw UnsupportedFormat("malformed manifest record: " + line);
    }
    if (split == "train") r.split = Split::kTrain;
    else if (split == "val") r.split = Split::kValidation;
    else throw UnsupportedFormat("unknown split tag: " + split);
    m.records.push_back(std::move(r));
  }
  if (m.records.size() != declared) throw TruncatedData("manifest declares " + std::to_string(declared) + " records, found " + std::to_string(m.records.size()));
  return m;
}

namespace detail {

inline void put_f32le(std::vector<char>& out, float v) {
  auto bits = std::bit_cast<std::uint32_t>(v);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

inline float get_f32le(const unsigned char* p) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return std::bit_cast<float>(bits);
}

}  // namespace detail

/// Writes <prefix>.manifest and <prefix>.bin (per record: input patch, then
/// target patch, float32 little-endian).
inline void save_dataset(const PatchDataset& ds, const std::filesystem::path& prefix) {
  const ManifestHeader h{ds.patch_size, ds.peak, ds.seed, ds.train_fraction};
  {
    std::ofstream out(prefix.string() + ".manifest", std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + prefix.string() + ".manifest");
    out << format_manifest(h, ds.records);
  }
  std::vector<char> blob;
  blob.reserve(ds.size() * ds.patch_elems() * 8);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (float v : ds.input(i)) detail::put_f32le(blob, v);
    for (float v : ds.target(i)) detail::put_f32le(blob, v);
  }
  std::ofstream out(prefix.string() + ".bin", std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + prefix.string() + ".bin");
  out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!out) throw IoError("write failed: " + prefix.string() + ".bin");
}

inline PatchDataset load_dataset(const std::filesystem::path& prefix) {
  const std::filesystem::path manifest_path = prefix.string() + ".manifest";
  const std::filesystem::path blob_path = prefix.string() + ".bin";
  std::ifstream mf(manifest_path, std::ios::binary);
  if (!mf) throw FileNotFound("no such file: " + manifest_path.string());
  std::stringstream text;
  text << mf.rdbuf();
  Manifest m = parse_manifest(text.str());

  std::ifstream bf(blob_path, std::ios::binary);
  if (!bf) throw FileNotFound("no such file: " + blob_path.string());
  std::vector<unsigned char> blob((std::istreambuf_iterator<char>(bf)), std::istreambuf_iterator<char>());
  const std::size_t elems = m.header.patch_size * m.header.patch_size;
  if (blob.size() != m.records.size() * elems * 8) throw TruncatedData("dataset blob size does not match manifest");

  PatchDataset ds;
  ds.patch_size = m.header.patch_size;
  ds.peak = m.header.peak;
  ds.seed = m.header.seed;
  ds.train_fraction = m.header.train_fraction;
  ds.records = std::move(m.records);
  ds.inputs.resize(ds.size() * elems);
  ds.targets.resize(ds.size() * elems);
  const unsigned char* p = blob.data();
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < elems; ++j, p += 4) ds.inputs[i * elems + j] = detail::get_f32le(p);
    for (std::size_t j = 0; j < elems; ++j, p += 4) ds.targets[i * elems + j] = detail::get_f32le(p);
  }
  return ds;
}

}  // namespace pdn
