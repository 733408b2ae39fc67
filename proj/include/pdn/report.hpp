#pragma once

// CSV report layouts. Numbers use fixed 4-decimal formatting so golden files
// are stable; every report starts with '#'-prefixed provenance lines.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "pdn/error.hpp"
#include "pdn/eval/suite.hpp"
#include "pdn/model/train.hpp"

namespace pdn::report {

using Provenance = std::vector<std::pair<std::string, std::string>>;

inline std::string fixed4(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  // "-0.0000" reads badly in golden files.
  if (std::string(buf) == "-0.0000") return "0.0000";
  return buf;
}

inline std::string header(const Provenance& prov) {
  std::string out;
  for (const auto& [k, v] : prov) out += "# " + k + "=" + v + "\n";
  return out;
}

inline std::string eval_csv(const eval::EvalReport& r, const Provenance& prov = {}) {
  std::string out = header(prov);
  out += "image_id,baseline_psnr_db,candidate_psnr_db,gain_db\n";
  for (const auto& rec : r.records) {
    out += rec.image_id + "," + fixed4(rec.baseline_psnr_db) + "," + fixed4(rec.candidate_psnr_db) + "," +
           fixed4(rec.gain_db) + "\n";
  }
  out += "mean_gain," + fixed4(r.mean_gain_db) + "\n";
  out += "t_stat," + fixed4(r.t_stat) + "\n";
  out += "p_value," + fixed4(r.p_value) + "\n";
  out += "win_rate," + fixed4(r.win_rate) + "\n";
  return out;
}

inline std::string train_csv(const model::TrainReport& r, const Provenance& prov = {}) {
  std::string out = header(prov);
  out += "epoch,train_mse,validation_mse,epoch_seconds\n";
  for (std::size_t e = 0; e < r.epochs_completed; ++e) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%zu,%.8g,%.8g,%.3f\n", e + 1, r.train_mse[e], r.validation_mse[e],
                  r.epoch_seconds[e]);
    out += buf;
  }
  return out;
}

struct StrideRow {
  std::size_t stride = 0;
  double time_per_image_s = 0.0;
  double mean_psnr_db = 0.0;
  double mean_gain_db = 0.0;
  double t_stat = 0.0;
  double p_value = 0.0;
  std::size_t patch_count = 0;  // patches per image (first image)
};

inline std::string stride_csv(const std::vector<StrideRow>& rows, const Provenance& prov = {}) {
  std::string out = header(prov);
  out += "stride,time_per_image_s,mean_psnr_db,mean_gain_db,t_stat,p_value,patch_count\n";
  for (const auto& r : rows) {
    out += std::to_string(r.stride) + "," + fixed4(r.time_per_image_s) + "," + fixed4(r.mean_psnr_db) + "," +
           fixed4(r.mean_gain_db) + "," + fixed4(r.t_stat) + "," + fixed4(r.p_value) + "," +
           std::to_string(r.patch_count) + "\n";
  }
  return out;
}

struct PeakRow {
  double peak = 0.0;
  double baseline_psnr_db = 0.0;
  double candidate_psnr_db = 0.0;
  double mean_gain_db = 0.0;
  double win_rate = 0.0;
  double t_stat = 0.0;
  double p_value = 0.0;
};

inline std::string peak_csv(const std::vector<PeakRow>& rows, const Provenance& prov = {}) {
  std::string out = header(prov);
  out += "peak,baseline_psnr_db,candidate_psnr_db,mean_gain_db,win_rate,t_stat,p_value\n";
  for (const auto& r : rows) {
    out += fixed4(r.peak) + "," + fixed4(r.baseline_psnr_db) + "," + fixed4(r.candidate_psnr_db) + "," +
           fixed4(r.mean_gain_db) + "," + fixed4(r.win_rate) + "," + fixed4(r.t_stat) + "," + fixed4(r.p_value) + "\n";
  }
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write report: " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace pdn::report
