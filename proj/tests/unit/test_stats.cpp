#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"
#include "xqd/stats.hpp"

using namespace xqd;
using testing_support::error_of;

namespace {

JointHistogram hist(std::initializer_list<std::pair<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t>> cells) {
  JointHistogram h;
  h.window_width_ns = 1000.0;
  for (const auto& [c, n] : cells) {
    h.counts[c] = n;
    h.total_windows += n;
  }
  return h;
}

ScanImage image(std::vector<std::uint64_t> counts) {
  std::vector<double> pos;
  for (std::size_t i = 0; i < counts.size(); ++i) pos.push_back(0.25 * static_cast<double>(i));
  return ScanImage::from_counts(pos, std::move(counts), ScanMode::A_Quantum);
}

}  // namespace

TEST(Correlation, PerfectPairsVanish) { EXPECT_EQ(degree_of_correlation(hist({{{1, 1}, 1000}})), 0.0); }

TEST(Correlation, HandComputed) {
  // d = {0, 1, -1, 0}, mean d = 0, var = 0.5; mean sum = (2 + 1 + 1 + 4) / 4 = 2.
  const auto h = hist({{{1, 1}, 1}, {{0, 1}, 1}, {{1, 0}, 1}, {{2, 2}, 1}});
  EXPECT_DOUBLE_EQ(degree_of_correlation(h), 0.25);
}

TEST(Correlation, Degenerate) {
  EXPECT_EQ(error_of([] { degree_of_correlation(hist({{{0, 0}, 10}})); }), Errc::Degenerate);
  EXPECT_EQ(error_of([] { degree_of_correlation(hist({{{1, 1}, 1}})); }), Errc::Degenerate);
  EXPECT_EQ(error_of([] { degree_of_correlation(JointHistogram{}); }), Errc::Degenerate);
}

TEST(ScanModeNames, RoundTrip) {
  for (auto m : {ScanMode::A_Quantum, ScanMode::B_ClassicalSingles, ScanMode::C_ClassicalCoincidence}) {
    EXPECT_EQ(parse_scan_mode(to_string(m)), m);
  }
  EXPECT_EQ(parse_scan_mode("b"), ScanMode::B_ClassicalSingles);
  EXPECT_EQ(error_of([] { parse_scan_mode("D"); }), Errc::Validation);
}

TEST(Image, ErrorsArePoisson) {
  const auto img = image({0, 4, 9, 100});
  for (std::size_t i = 0; i < img.counts.size(); ++i) {
    EXPECT_DOUBLE_EQ(img.errors[i] * img.errors[i], static_cast<double>(img.counts[i]));
  }
  EXPECT_EQ(error_of([] { ScanImage::from_counts({0.0}, {1, 2}, ScanMode::A_Quantum); }), Errc::InvalidConfig);
}

TEST(Partition, ThirtyPercentRule) {
  const auto p = threshold_partition(image({100, 71, 69, 10, 13, 14, 50}));
  EXPECT_EQ(p.max_positions, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(p.min_positions, (std::vector<std::size_t>{3, 4}));
}

TEST(Partition, Errors) {
  EXPECT_EQ(error_of([] { threshold_partition(image({100, 100, 95})); }), Errc::OverlappingPartition);
  EXPECT_EQ(error_of([] { threshold_partition(image({0, 0, 0})); }), Errc::Degenerate);
  EXPECT_EQ(error_of([] { threshold_partition(image({5})); }), Errc::Degenerate);
}

TEST(Visibility, ValueAndError) {
  const auto v = visibility(image({90, 110, 30, 10}));
  // hi = 100 over 2 positions, lo = 10 over 1 position (30 > 13).
  EXPECT_NEAR(v.value, 90.0 / 110.0, 1e-12);
  const double err = 2.0 / (110.0 * 110.0) * std::sqrt(10.0 * 10.0 * 50.0 + 100.0 * 100.0 * 10.0);
  EXPECT_NEAR(v.error, err, 1e-12);
}

TEST(Snr, InfiniteWhenMinimaEmpty) {
  const auto s = snr(image({0, 100, 0, 98}));
  EXPECT_TRUE(s.infinite());
  EXPECT_DOUBLE_EQ(s.i_max_mean, 99.0);
  EXPECT_DOUBLE_EQ(visibility(image({0, 100, 0, 98})).value, 1.0);
}

TEST(Snr, Ratio) {
  const auto s = snr(image({150, 60, 150, 60}));
  ASSERT_FALSE(s.infinite());
  EXPECT_DOUBLE_EQ(*s.value, 2.5);
}

TEST(ImageStats, Consistent) {
  const auto r = image_stats(image({150, 60, 150, 60, 62}));
  EXPECT_EQ(r.n_max_positions, 2u);
  EXPECT_EQ(r.n_min_positions, 3u);
  EXPECT_NEAR(r.i_min_mean, 182.0 / 3.0, 1e-12);
  EXPECT_NEAR(r.visibility, (150.0 - r.i_min_mean) / (150.0 + r.i_min_mean), 1e-12);
  EXPECT_FALSE(r.sigma.has_value());
}
