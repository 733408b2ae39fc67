#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "pdn/error.hpp"
#include "pdn/eval/stats.hpp"
#include "pdn/image.hpp"
#include "pdn/log.hpp"

namespace pdn::eval {

struct ImageRecord {
  std::string image_id;
  double baseline_psnr_db = 0.0;
  double candidate_psnr_db = 0.0;
  double gain_db = 0.0;
};

struct EvalReport {
  std::vector<ImageRecord> records;
  std::vector<std::string> denoiser_names;
  std::vector<double> mean_psnr_db;  // per denoiser, finite values only
  double mean_gain_db = 0.0;
  double t_stat = std::numeric_limits<double>::quiet_NaN();
  double p_value = std::numeric_limits<double>::quiet_NaN();
  bool degenerate = false;  // t-test undefined (n < 2 or zero variance)
  double win_rate = 0.0;
  std::size_t stride = 0;
  double peak = 0.0;
  std::size_t excluded = 0;  // records with an infinite PSNR
};

/// Fills the summary fields of `report` from its records.
inline void summarize(EvalReport& report) {
  std::vector<double> gains;
  std::size_t wins = 0;
  report.excluded = 0;
  for (const auto& r : report.records) {
    if (r.gain_db > 0.0) ++wins;
    if (std::isfinite(r.gain_db)) {
      gains.push_back(r.gain_db);
    } else {
      ++report.excluded;
    }
  }
  if (report.excluded > 0) {
    warn(std::to_string(report.excluded) + " record(s) with infinite PSNR excluded from statistics");
  }
  report.win_rate = report.records.empty() ? 0.0 : static_cast<double>(wins) / static_cast<double>(report.records.size());
  report.mean_gain_db = 0.0;
  for (double g : gains) report.mean_gain_db += g;
  if (!gains.empty()) report.mean_gain_db /= static_cast<double>(gains.size());
  report.degenerate = false;
  report.t_stat = report.p_value = std::numeric_limits<double>::quiet_NaN();
  try {
    const auto t = paired_t_test(gains);
    report.t_stat = t.t;
    report.p_value = t.p_two_tailed;
  } catch (const InvalidArgument&) {
    report.degenerate = true;
  } catch (const DegenerateStatistic&) {
    report.degenerate = true;
  }
}

struct NamedDenoiser {
  std::string name;
  std::function<Image(const Image&)> run;
};

/// PSNR of every denoiser on every image; denoisers[0] is the baseline and
/// denoisers[1] the candidate for gains and statistics.
inline EvalReport evaluate_suite(const std::vector<Image>& clean, const std::vector<Image>& corrupted,
                                 const std::vector<std::string>& ids, const std::vector<NamedDenoiser>& denoisers,
                                 std::size_t stride, double peak) {
  if (clean.size() != corrupted.size() || clean.size() != ids.size()) {
    throw ShapeMismatch("evaluate_suite: clean, corrupted and id lists differ in length");
  }
  if (clean.empty()) throw InvalidArgument("evaluate_suite: no images to evaluate");
  if (denoisers.size() < 2) throw InvalidArgument("evaluate_suite: need a baseline and a candidate denoiser");
  EvalReport report;
  report.stride = stride;
  report.peak = peak;
  for (const auto& d : denoisers) report.denoiser_names.push_back(d.name);
  std::vector<double> sums(denoisers.size(), 0.0);
  std::vector<std::size_t> counts(denoisers.size(), 0);
  for (std::size_t i = 0; i < clean.size(); ++i) {
    if (!clean[i].same_shape(corrupted[i])) throw ShapeMismatch("evaluate_suite: image " + ids[i] + " shape differs");
    std::vector<double> scores;
    for (std::size_t d = 0; d < denoisers.size(); ++d) {
      scores.push_back(psnr(clean[i], denoisers[d].run(corrupted[i])));
      if (std::isfinite(scores.back())) {
        sums[d] += scores.back();
        ++counts[d];
      }
    }
    report.records.push_back({ids[i], scores[0], scores[1], scores[1] - scores[0]});
  }
  for (std::size_t d = 0; d < denoisers.size(); ++d) {
    report.mean_psnr_db.push_back(counts[d] ? sums[d] / static_cast<double>(counts[d]) : std::nan(""));
  }
  summarize(report);
  return report;
}

}  // namespace pdn::eval
