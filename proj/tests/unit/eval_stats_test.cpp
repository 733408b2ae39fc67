#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "pdn/eval/stats.hpp"
#include "pdn/eval/suite.hpp"
#include "pdn/log.hpp"
#include "pdn/random.hpp"
#include "pdn/report.hpp"
#include "pdn/selftest.hpp"
#include "support/synthetic.hpp"

namespace {

using pdn::Image;
namespace eval = pdn::eval;

class CaptureWarnings {
 public:
  CaptureWarnings() {
    previous_ = pdn::set_warning_handler([this](const std::string& m) { messages.push_back(m); });
  }
  ~CaptureWarnings() { pdn::set_warning_handler(previous_); }
  std::vector<std::string> messages;

 private:
  pdn::WarningHandler previous_;
};

Image add_offset(const Image& img, double delta) {
  Image out = img;
  for (double& v : out.pixels()) v += delta;
  return out;
}

// Two-tailed tail mass by composite Simpson integration of the Student density.
double simpson_two_tailed(double t, double df) {
  const double c = std::exp(std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0)) / std::sqrt(df * M_PI);
  auto density = [&](double x) { return c * std::pow(1.0 + x * x / df, -(df + 1.0) / 2.0); };
  const int n = 20000;
  const double h = std::fabs(t) / n;
  double acc = density(0.0) + density(std::fabs(t));
  for (int i = 1; i < n; ++i) acc += (i % 2 ? 4.0 : 2.0) * density(i * h);
  return 1.0 - 2.0 * acc * h / 3.0;
}

TEST(Psnr, ReferenceValues) {
  EXPECT_DOUBLE_EQ(eval::psnr_from_mse(255.0 * 255.0), 0.0);
  EXPECT_NEAR(eval::psnr_from_mse(255.0 * 255.0 / 100.0), 20.0, 1e-12);
  EXPECT_EQ(eval::psnr_from_mse(0.0), std::numeric_limits<double>::infinity());
  EXPECT_NEAR(eval::psnr_from_mse(1.0, 1.0), 0.0, 1e-15);
}

TEST(Psnr, OnImages) {
  const Image a(2, 2, {0, 0, 0, 0});
  const Image b(2, 2, {255, 255, 255, 255});
  EXPECT_NEAR(eval::psnr(a, b), 0.0, 1e-12);
  const Image c(2, 2, {25.5, 25.5, 25.5, 25.5});
  EXPECT_NEAR(eval::psnr(a, c), 20.0, 1e-12);
  EXPECT_EQ(eval::psnr(b, b), std::numeric_limits<double>::infinity());
  EXPECT_THROW(eval::psnr(a, Image(4, 1)), pdn::ShapeMismatch);
}

TEST(Psnr, RescalesThroughPeaks) {
  // At peak 4 a full-scale error of 0.4 is 10% of range: 20 dB.
  const Image ref(1, 2, {1.0, 2.0}, 4.0);
  const Image off(1, 2, {1.4, 2.4}, 4.0);
  EXPECT_NEAR(eval::psnr(ref, off), 20.0, 1e-9);
}

TEST(Psnr, SymmetricInItsArguments) {
  const Image a = pdn::testing::synthetic_scene(20, 20, 1);
  const Image b = pdn::testing::synthetic_scene(20, 20, 2);
  EXPECT_DOUBLE_EQ(eval::psnr(a, b), eval::psnr(b, a));
}

TEST(Psnr, DecreasesAsNoiseGrows) {
  const Image clean = pdn::testing::synthetic_scene(64, 64, 3);
  pdn::CounterRng rng(4, pdn::RngDomain::kTest);
  std::vector<double> unit(clean.size());
  for (double& v : unit) v = rng.uniform() - 0.5;
  double previous = std::numeric_limits<double>::infinity();
  for (double scale : {2.0, 8.0, 32.0}) {
    std::vector<double> px = clean.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = std::max(0.0, px[i] + scale * unit[i]);
    const double p = eval::psnr(clean, Image(64, 64, px, 255.0));
    EXPECT_LT(p, previous) << scale;
    previous = p;
  }
}

TEST(SnrTheoretical, SquareRootOfMean) {
  EXPECT_EQ(eval::snr_theoretical(4.0), 2.0);
  EXPECT_EQ(eval::snr_theoretical(0.0), 0.0);
  EXPECT_EQ(eval::snr_theoretical(16.0), 4.0);
  EXPECT_GT(eval::snr_theoretical(16.0), eval::snr_theoretical(4.0));
  EXPECT_THROW(eval::snr_theoretical(-1.0), pdn::InvalidArgument);
}

TEST(PairedTTest, PublishedGains) {
  const auto r = eval::paired_t_test(pdn::selftest::table1_gains());
  EXPECT_EQ(r.n, 21u);
  EXPECT_NEAR(r.mean, 0.3776, 5e-5);
  EXPECT_NEAR(r.mean, 0.38, 0.005);
  EXPECT_NEAR(r.t, 4.2418, 0.05);
  EXPECT_NEAR(r.p_two_tailed, 0.0004, 0.0002);
}

TEST(PairedTTest, ZeroMean) {
  const auto r = eval::paired_t_test(std::vector<double>{1, -1, 1, -1});
  EXPECT_EQ(r.t, 0.0);
  EXPECT_NEAR(r.p_two_tailed, 1.0, 1e-15);
}

TEST(PairedTTest, ClosedFormDfTwo) {
  const auto r = eval::paired_t_test(std::vector<double>{1, 2, 3});
  EXPECT_NEAR(r.t, 2.0 * std::sqrt(3.0), 1e-12);
  // df = 2: p = 1 - t / sqrt(2 + t^2).
  EXPECT_NEAR(r.p_two_tailed, 1.0 - r.t / std::sqrt(2.0 + r.t * r.t), 1e-12);
  EXPECT_NEAR(r.p_two_tailed, 0.0742, 5e-5);
}

TEST(PairedTTest, NegationFlipsTKeepsP) {
  pdn::CounterRng rng(5, pdn::RngDomain::kTest);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> d(2 + rng.below(30));
    for (double& v : d) v = rng.uniform() - 0.3;
    std::vector<double> neg(d);
    for (double& v : neg) v = -v;
    const auto a = eval::paired_t_test(d);
    const auto b = eval::paired_t_test(neg);
    EXPECT_NEAR(a.t, -b.t, 1e-12 * std::fabs(a.t));
    EXPECT_NEAR(a.p_two_tailed, b.p_two_tailed, 1e-14);
  }
}

TEST(PairedTTest, Errors) {
  EXPECT_THROW(eval::paired_t_test(std::vector<double>{1.0}), pdn::InvalidArgument);
  EXPECT_THROW(eval::paired_t_test(std::vector<double>{}), pdn::InvalidArgument);
  EXPECT_THROW(eval::paired_t_test(std::vector<double>{0.5, 0.5, 0.5}), pdn::DegenerateStatistic);
}

TEST(PairedTTest, PValueMatchesDensityIntegration) {
  for (double df : {2.0, 20.0}) {
    for (double t : {0.0, 1.0, 2.0, 4.2418}) {
      EXPECT_NEAR(eval::student_t_two_tailed(t, df), simpson_two_tailed(t, df), 1e-6) << "df " << df << " t " << t;
      EXPECT_NEAR(eval::student_t_two_tailed(-t, df), eval::student_t_two_tailed(t, df), 1e-15);
    }
  }
}

struct Suite {
  std::vector<Image> clean;
  std::vector<Image> noisy;
  std::vector<std::string> ids;
};

Suite make_suite(std::size_t n) {
  Suite s;
  for (std::size_t i = 0; i < n; ++i) {
    s.clean.push_back(pdn::testing::synthetic_scene(24, 24, 40 + i));
    s.noisy.push_back(add_offset(s.clean.back(), 3.0 + static_cast<double>(i)));
    s.ids.push_back("img" + std::to_string(i));
  }
  return s;
}

TEST(EvaluateSuite, IdenticalDenoisersAreDegenerate) {
  const auto s = make_suite(4);
  const eval::NamedDenoiser same{"same", [](const Image& x) { return x; }};
  const auto r = eval::evaluate_suite(s.clean, s.noisy, s.ids, {same, same}, 2, 4.0);
  ASSERT_EQ(r.records.size(), 4u);
  for (const auto& rec : r.records) EXPECT_EQ(rec.gain_db, 0.0);
  EXPECT_TRUE(r.degenerate);
  EXPECT_TRUE(std::isnan(r.t_stat));
  EXPECT_EQ(r.win_rate, 0.0);
  EXPECT_EQ(r.stride, 2u);
  EXPECT_EQ(r.peak, 4.0);
}

TEST(EvaluateSuite, OneDecibelBetterCandidateWinsEverywhere) {
  auto s = make_suite(5);
  // Shrinking a constant error by 10^(1/20) lowers MSE by 10^(1/10): +1 dB.
  const double shrink = std::pow(10.0, -0.05);
  std::vector<Image> better;
  for (std::size_t i = 0; i < s.clean.size(); ++i) better.push_back(add_offset(s.clean[i], (3.0 + static_cast<double>(i)) * shrink));
  std::size_t calls = 0;
  const eval::NamedDenoiser base{"identity", [](const Image& x) { return x; }};
  const eval::NamedDenoiser cand{"oracle", [&](const Image&) { return better[calls++]; }};
  const auto r = eval::evaluate_suite(s.clean, s.noisy, s.ids, {base, cand}, 1, 255.0);
  for (const auto& rec : r.records) {
    EXPECT_NEAR(rec.gain_db, 1.0, 1e-9);
    EXPECT_DOUBLE_EQ(rec.gain_db, rec.candidate_psnr_db - rec.baseline_psnr_db);
  }
  EXPECT_EQ(r.win_rate, 1.0);
  EXPECT_NEAR(r.mean_gain_db, 1.0, 1e-9);
  ASSERT_EQ(r.mean_psnr_db.size(), 2u);
  EXPECT_NEAR(r.mean_psnr_db[1] - r.mean_psnr_db[0], 1.0, 1e-9);
}

TEST(EvaluateSuite, WinRateArithmetic) {
  eval::EvalReport r;
  for (int i = 0; i < 21; ++i) r.records.push_back({"i" + std::to_string(i), 20.0, i == 7 ? 19.5 : 20.4 + 0.01 * i, 0.0});
  for (auto& rec : r.records) rec.gain_db = rec.candidate_psnr_db - rec.baseline_psnr_db;
  eval::summarize(r);
  EXPECT_NEAR(r.win_rate, 20.0 / 21.0, 1e-15);
  EXPECT_EQ(pdn::report::fixed4(100.0 * r.win_rate), "95.2381");
  EXPECT_FALSE(r.degenerate);
  EXPECT_GT(r.t_stat, 0.0);
}

TEST(EvaluateSuite, InfiniteScoresAreExcludedWithANote) {
  eval::EvalReport r;
  const double inf = std::numeric_limits<double>::infinity();
  r.records = {{"a", 10, 11, 1}, {"b", 10, 12.5, 2.5}, {"c", 10, inf, inf}, {"d", 10, 10.5, 0.5}};
  CaptureWarnings warnings;
  eval::summarize(r);
  EXPECT_EQ(r.excluded, 1u);
  EXPECT_NEAR(r.mean_gain_db, 4.0 / 3.0, 1e-12);
  EXPECT_TRUE(std::isfinite(r.t_stat));
  EXPECT_EQ(warnings.messages.size(), 1u);
}

TEST(EvaluateSuite, RejectsMisalignedLists) {
  auto s = make_suite(3);
  const eval::NamedDenoiser id{"identity", [](const Image& x) { return x; }};
  s.ids.pop_back();
  EXPECT_THROW(eval::evaluate_suite(s.clean, s.noisy, s.ids, {id, id}, 1, 4.0), pdn::ShapeMismatch);
  s = make_suite(2);
  s.noisy[1] = Image(5, 5, std::vector<double>(25, 1.0));
  EXPECT_THROW(eval::evaluate_suite(s.clean, s.noisy, s.ids, {id, id}, 1, 4.0), pdn::ShapeMismatch);
  EXPECT_THROW(eval::evaluate_suite({}, {}, {}, {id, id}, 1, 4.0), pdn::InvalidArgument);
  s = make_suite(2);
  EXPECT_THROW(eval::evaluate_suite(s.clean, s.noisy, s.ids, {id}, 1, 4.0), pdn::InvalidArgument);
}

TEST(Reports, EvalLayout) {
  eval::EvalReport r;
  r.records = {{"lena", 21.0, 21.49, 0.49}, {"pepper", 20.0, 20.54, 0.54}, {"boat", 22.0, 21.86, -0.14}};
  eval::summarize(r);
  const std::string csv = pdn::report::eval_csv(r, {{"peak", "4"}, {"seed", "7"}});
  const std::string expected =
      "# peak=4\n"
      "# seed=7\n"
      "image_id,baseline_psnr_db,candidate_psnr_db,gain_db\n"
      "lena,21.0000,21.4900,0.4900\n"
      "pepper,20.0000,20.5400,0.5400\n"
      "boat,22.0000,21.8600,-0.1400\n"
      "mean_gain,0.2967\n"
      "t_stat," + pdn::report::fixed4(r.t_stat) + "\n"
      "p_value," + pdn::report::fixed4(r.p_value) + "\n"
      "win_rate,0.6667\n";
  EXPECT_EQ(csv, expected);
}

TEST(Reports, FixedFormatting) {
  EXPECT_EQ(pdn::report::fixed4(4.24184), "4.2418");
  EXPECT_EQ(pdn::report::fixed4(-0.00001), "0.0000");
  EXPECT_EQ(pdn::report::fixed4(std::nan("")), "nan");
  EXPECT_EQ(pdn::report::fixed4(std::numeric_limits<double>::infinity()), "inf");
}

TEST(Reports, SweepLayouts) {
  const std::string stride = pdn::report::stride_csv({{2, 0.5, 25.47, 0.4, 4.2, 0.0004, 50625}});
  EXPECT_EQ(stride,
            "stride,time_per_image_s,mean_psnr_db,mean_gain_db,t_stat,p_value,patch_count\n"
            "2,0.5000,25.4700,0.4000,4.2000,0.0004,50625\n");
  const std::string peak = pdn::report::peak_csv({{4.0, 21.0, 21.38, 0.38, 20.0 / 21.0, 4.24, 0.0004}});
  EXPECT_EQ(peak,
            "peak,baseline_psnr_db,candidate_psnr_db,mean_gain_db,win_rate,t_stat,p_value\n"
            "4.0000,21.0000,21.3800,0.3800,0.9524,4.2400,0.0004\n");
}

}  // namespace
