#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "pdn/error.hpp"

namespace pdn::model {

/// One convolution of a branch's compressing half; the mirrored transposed
/// convolution is derived from it.
struct LayerSpec {
  std::size_t out_channels = 0;
  std::size_t kernel = 5;
  std::size_t stride = 2;
  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

using BranchSpec = std::vector<LayerSpec>;

enum class MergeRule { kMean };

struct NetworkConfig {
  std::size_t patch_size = 64;
  std::vector<BranchSpec> branches = default_branches();
  bool skip = true;
  MergeRule merge = MergeRule::kMean;
  std::uint64_t seed = 0;

  /// Upper branch: 32, 16 channels. Lower branch: 32, 16, 8 channels.
  static std::vector<BranchSpec> default_branches() {
    return {{{32, 5, 2}, {16, 5, 2}}, {{32, 5, 2}, {16, 5, 2}, {8, 5, 2}}};
  }

  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

/// Every branch must shrink the patch by an exact integer factor so that the
/// mirrored chain restores patch_size.
inline void validate(const NetworkConfig& cfg) {
  if (cfg.patch_size == 0) throw InvalidArgument("patch_size must be positive");
  if (cfg.branches.empty()) throw InvalidArgument("network needs at least one branch");
  for (std::size_t b = 0; b < cfg.branches.size(); ++b) {
    const auto& branch = cfg.branches[b];
    if (branch.empty()) throw InvalidArgument("branch " + std::to_string(b) + " has no layers");
    std::size_t size = cfg.patch_size;
    for (const auto& l : branch) {
      if (l.out_channels == 0) throw InvalidArgument("layer channels must be positive");
      if (l.kernel % 2 == 0) throw InvalidArgument("layer kernel must be odd");
      if (l.stride == 0) throw InvalidArgument("layer stride must be >= 1");
      if (size % l.stride != 0) {
        throw ShapeMismatch("branch " + std::to_string(b) + ": size " + std::to_string(size) +
                            " not divisible by stride " + std::to_string(l.stride) +
                            "; the transposed chain could not restore the patch size");
      }
      size /= l.stride;
    }
    if (size < 1) throw ShapeMismatch("branch " + std::to_string(b) + " compresses below 1x1");
  }
}

/// "32:5:2,16:5:2" form used in config blocks and on the command line.
inline std::string format_branch(const BranchSpec& branch) {
  std::ostringstream out;
  for (std::size_t i = 0; i < branch.size(); ++i) {
    if (i) out << ',';
    out << branch[i].out_channels << ':' << branch[i].kernel << ':' << branch[i].stride;
  }
  return out.str();
}

inline BranchSpec parse_branch(const std::string& text) {
  BranchSpec out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    LayerSpec l;
    char c1 = 0;
    char c2 = 0;
    std::istringstream fields(item);
    if (!(fields >> l.out_channels >> c1 >> l.kernel >> c2 >> l.stride) || c1 != ':' || c2 != ':') {
      throw InvalidArgument("malformed branch layer '" + item + "' (expected channels:kernel:stride)");
    }
    out.push_back(l);
  }
  if (out.empty()) throw InvalidArgument("empty branch spec");
  return out;
}

}  // namespace pdn::model
