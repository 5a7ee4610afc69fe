#include <gtest/gtest.h>

#include <cmath>

#include "gqn/cost_model.hpp"
#include "gqn/error.hpp"

namespace gqn::cost {
namespace {

using pipeline::GqnConfig;

GqnConfig single_set(double ratio, std::size_t k) {
  GqnConfig config = GqnConfig::full_size();
  config.sets = {{.queries = 32, .ratio = ratio, .k = k}};
  return config;
}

TEST(ProcessingCost, Examples) {
  EXPECT_EQ(processing_cost(100, 20), 2000u);
  EXPECT_EQ(processing_cost(2, 1), 2u);
  for (std::uint64_t k = 1; k < 50; ++k) EXPECT_GT(processing_cost(60, k + 1), processing_cost(60, k));
  EXPECT_THROW(processing_cost(5, 5), ConfigError);
  EXPECT_THROW(processing_cost(1, 1), ConfigError);
  EXPECT_THROW(processing_cost(5, 0), ConfigError);
}

TEST(ConstructionCost, Examples) {
  EXPECT_EQ(construction_cost(100, 4, ConstructionMode::naive), 4950.0);
  EXPECT_EQ(construction_cost(1024, 8, ConstructionMode::indexed), 18432.0);
  for (std::uint64_t k = 1; k < 99; ++k)
    EXPECT_EQ(construction_cost(100, k, ConstructionMode::naive), 4950.0);
  EXPECT_THROW(construction_cost(8, 8, ConstructionMode::indexed), ConfigError);
  EXPECT_THROW(construction_cost(8, 9, ConstructionMode::naive), ConfigError);
}

TEST(CompareFullVsQueries, FullSizeConfigProcessingReductionIsExact) {
  for (std::uint64_t m : {1000u, 10000u, 40000u}) {
    const auto report = compare_full_vs_queries(m, GqnConfig::full_size());
    // 1 - (0.3 M * 12) / (M * 20) = 41 / 50.
    EXPECT_EQ(report.processing_reduction, (Ratio{41, 50})) << m;
    EXPECT_EQ(report.full.processing, m * 20);
    EXPECT_EQ(report.peak_processing, m * 3 / 10 * 12);
  }
}

TEST(CompareFullVsQueries, IndexedAtTenThousand) {
  const auto report = compare_full_vs_queries(10000, GqnConfig::full_size());
  const double oracle =
      1.0 - (3000.0 * std::log2(3000.0) + 36000.0) / (10000.0 * std::log2(10000.0) + 200000.0);
  EXPECT_NEAR(report.indexed_construction_reduction, oracle, 1e-12);
  EXPECT_NEAR(report.indexed_construction_reduction, 0.788, 5e-4);
}

TEST(CompareFullVsQueries, NaiveApproachesNinetyOnePercent) {
  const auto report = compare_full_vs_queries(262144, GqnConfig::full_size());
  const double n = std::round(0.3 * 262144);
  const double oracle = 1.0 - (n * (n - 1)) / (262144.0 * 262143.0);
  EXPECT_NEAR(report.naive_construction_reduction.value(), oracle, 1e-12);
  EXPECT_NEAR(report.naive_construction_reduction.value(), 0.91, 1e-3);
}

TEST(CompareFullVsQueries, ReductionBandsOverSweep) {
  for (std::uint64_t m = 64; m <= 262144; m *= 2) {
    const auto report = compare_full_vs_queries(m, GqnConfig::full_size());
    EXPECT_GE(report.naive_construction_reduction.value(), 0.80) << m;
    EXPECT_GE(report.processing_reduction.value(), 0.80) << m;
    if (m >= 4096) {
      EXPECT_GE(report.indexed_construction_reduction, 0.75) << m;
      EXPECT_LE(report.indexed_construction_reduction, 0.82) << m;
    }
  }
}

TEST(CompareFullVsQueries, PerSetRows) {
  const auto report = compare_full_vs_queries(1000, GqnConfig::full_size());
  ASSERT_EQ(report.sets.size(), 3u);
  EXPECT_EQ(report.sets[0].nodes, 100u);
  EXPECT_EQ(report.sets[1].nodes, 200u);
  EXPECT_EQ(report.sets[2].nodes, 300u);
  EXPECT_EQ(report.sets[1].processing, 1600u);
  EXPECT_EQ(report.sets[0].naive_construction, 4950u);
  EXPECT_EQ(report.full.nodes, 1000u);
}

TEST(CompareFullVsQueries, KNotBelowNIsAConfigError) {
  EXPECT_THROW(compare_full_vs_queries(40, GqnConfig::full_size()), ConfigError);
}

TEST(FlopEstimate, AffineInKAtFixedRatio) {
  std::vector<std::int64_t> flops;
  for (std::size_t k = 2; k <= 24; ++k)
    flops.push_back(static_cast<std::int64_t>(flop_estimate(single_set(0.2, k), 10000, 64)));
  const std::int64_t slope = flops[1] - flops[0];
  EXPECT_GT(slope, 0);
  for (std::size_t i = 1; i < flops.size(); ++i) EXPECT_EQ(flops[i] - flops[i - 1], slope);
}

TEST(FlopEstimate, IncreasesWithSamplingRatio) {
  std::uint64_t previous = 0;
  for (double ratio : {0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.4, 0.5}) {
    const auto flops = flop_estimate(single_set(ratio, 8), 10000, 64);
    EXPECT_GT(flops, previous) << ratio;
    previous = flops;
  }
}

TEST(FlopEstimate, DependsOnSizesOnly) {
  auto a = GqnConfig::full_size();
  auto b = GqnConfig::full_size();
  b.seed = 99;
  b.frequency_base = 10000.0;
  EXPECT_EQ(flop_estimate(a, 4096, 64), flop_estimate(b, 4096, 64));
  EXPECT_LT(flop_estimate(a, 4096, 32), flop_estimate(a, 4096, 64));
}

}  // namespace
}  // namespace gqn::cost
