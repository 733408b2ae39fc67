#pragma once

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "pdn/error.hpp"
#include "pdn/image.hpp"

namespace pdn::eval {

/// 10 log10(max^2 / mse); +infinity when mse == 0.
inline double psnr_from_mse(double mse, double max_intensity = 255.0) {
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(max_intensity * max_intensity / mse);
}

/// PSNR after mapping both images onto the 8-bit range through their peaks.
/// Identical images give +infinity, which aggregates skip.
inline double psnr(const Image& reference, const Image& candidate, double max_intensity = 255.0) {
  if (!reference.same_shape(candidate)) throw ShapeMismatch("psnr: image dimensions differ");
  const double rs = 255.0 / reference.peak();
  const double cs = 255.0 / candidate.peak();
  double acc = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double d = reference.pixels()[i] * rs - candidate.pixels()[i] * cs;
    acc += d * d;
  }
  return psnr_from_mse(acc / static_cast<double>(reference.size()), max_intensity);
}

/// Poisson SNR: mean / sqrt(mean) = sqrt(mean).
inline double snr_theoretical(double mean_count) {
  if (!(mean_count >= 0.0)) throw InvalidArgument("snr_theoretical: mean count must be >= 0");
  return std::sqrt(mean_count);
}

/// Two-tailed tail probability of Student's t with `df` degrees of freedom.
inline double student_t_two_tailed(double t, double df) {
  if (!(df > 0.0)) throw InvalidArgument("degrees of freedom must be positive");
  if (!std::isfinite(t)) return 0.0;
  const double x = df / (df + t * t);
  return boost::math::ibeta(df / 2.0, 0.5, x);
}

struct TTestResult {
  double mean = 0.0;
  double stddev = 0.0;
  double t = 0.0;
  double p_two_tailed = 1.0;
  std::size_t n = 0;
};

/// One-sample t-test of paired differences against a zero mean.
inline TTestResult paired_t_test(std::span<const double> diffs) {
  const std::size_t n = diffs.size();
  if (n < 2) throw InvalidArgument("paired_t_test: need at least 2 differences");
  if (std::all_of(diffs.begin(), diffs.end(), [&](double d) { return d == diffs.front(); })) {
    throw DegenerateStatistic("paired_t_test: all differences are identical (zero variance)");
  }
  TTestResult r;
  r.n = n;
  r.mean = std::accumulate(diffs.begin(), diffs.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double d : diffs) ss += (d - r.mean) * (d - r.mean);
  r.stddev = std::sqrt(ss / static_cast<double>(n - 1));
  r.t = r.mean / (r.stddev / std::sqrt(static_cast<double>(n)));
  r.p_two_tailed = student_t_two_tailed(r.t, static_cast<double>(n - 1));
  return r;
}

}  // namespace pdn::eval
