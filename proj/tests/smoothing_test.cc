#include "dph/smoothing.h"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <vector>

namespace dph {
namespace {

Histogram FromValues(std::vector<double> values) { return Histogram::FromValues(values); }

TEST(SmoothingParamsTest, RejectsForbiddenConfigurations) {
  const PermissibleGroups all = PermissibleGroups::All(3, 1.0);
  EXPECT_THROW(SmoothingParams::Create(all, ErrorMetric::kAbsolute, 0, 0, 1), ConfigError);
  EXPECT_THROW(SmoothingParams::Create(all, ErrorMetric::kAbsolute, -1, 1, 1), ConfigError);
  EXPECT_THROW(SmoothingParams::Create(all, ErrorMetric::kAbsolute, 0, 1, INFINITY),
               ConfigError);
  const SmoothingParams ok = SmoothingParams::Create(all, ErrorMetric::kSquared, 0.5, 0, 0.5);
  EXPECT_DOUBLE_EQ(ok.total(), 1.0);
}

TEST(OrderingTest, ZeroBudgetIsPassThrough) {
  const Histogram h = FromValues({3, 1, 2});
  NoiseSource src(1);
  BudgetLedger ledger(1.0);
  const NoisyHistogram out = Ordering(h, 0.0, true, src, ledger);
  EXPECT_EQ(out.values(), h.values());
  EXPECT_EQ(ledger.entries().size(), 0u);
  EXPECT_EQ(src.position(), 0u);
}

TEST(OrderingTest, SortsDescendingKeepingLabels) {
  const Histogram h = FromValues({1, 9, 5});
  NoiseSource src(2);
  BudgetLedger ledger(1e9);
  const NoisyHistogram out = Ordering(h, 1e9, true, src, ledger);
  EXPECT_EQ(out[0].label.name, "2");
  EXPECT_EQ(out[1].label.name, "3");
  EXPECT_EQ(out[2].label.name, "1");
  EXPECT_NEAR(*out[0].value, 9.0, 1e-6);
  EXPECT_TRUE(ledger.Finalizable());
}

TEST(SmoothingModuleTest, VanishingNoiseGivesExactAverages) {
  const Histogram h = FromValues({4, 4, 8, 8});
  const SmoothingParams p =
      SmoothingParams::Create(PermissibleGroups::All(4, 1.0), ErrorMetric::kAbsolute, 0, 1e9, 1e9);
  NoiseSource src(3);
  BudgetLedger ledger(2e9);
  const NoisyHistogram out = SmoothingModule(h, p, src, ledger);
  const std::vector<double> values = out.values();
  EXPECT_NEAR(values[0], 4.0, 1e-6);
  EXPECT_NEAR(values[1], 4.0, 1e-6);
  EXPECT_NEAR(values[2], 8.0, 1e-6);
  EXPECT_NEAR(values[3], 8.0, 1e-6);
  EXPECT_EQ(out[0].label.group, out[1].label.group);
  EXPECT_NE(out[1].label.group, out[2].label.group);
  EXPECT_TRUE(ledger.Finalizable());
}

TEST(SmoothingModuleTest, OutputEqualsTrueGroupMeanAsNoiseVanishes) {
  NoiseSource data(4);
  std::vector<double> values(40);
  for (double& v : values) v = static_cast<double>(data.UniformInt(0, 30));
  const Histogram h = FromValues(values);
  for (ErrorMetric metric : {ErrorMetric::kAbsolute, ErrorMetric::kSquared}) {
    const SmoothingParams p =
        SmoothingParams::Create(PermissibleGroups::All(40, 1e-6), metric, 0, 1e9, 1e9);
    NoiseSource src(5);
    BudgetLedger ledger(2e9);
    const NoisyHistogram out = SmoothingModule(h, p, src, ledger);
    std::map<std::size_t, std::pair<double, int>> sums;
    for (std::size_t i = 0; i < h.size(); ++i) {
      auto& [sum, count] = sums[*out[i].label.group];
      sum += values[i];
      ++count;
    }
    for (std::size_t i = 0; i < h.size(); ++i) {
      const auto& [sum, count] = sums[*out[i].label.group];
      EXPECT_NEAR(*out[i].value, sum / count, 1e-6);
    }
  }
}

TEST(SmoothingModuleTest, GroupMembersShareOneValueAndLedgerAddsUp) {
  NoiseSource data(6);
  std::vector<double> values(64);
  for (double& v : values) v = static_cast<double>(data.UniformInt(0, 5));
  const Histogram h = FromValues(values);
  struct Wiring {
    ErrorMetric metric;
    double e1, e2, e3;
    bool sort;
  };
  for (const Wiring& w : {Wiring{ErrorMetric::kAbsolute, 0, 0.25, 0.75, true},
                          Wiring{ErrorMetric::kSquared, 0.5, 0, 0.5, false},
                          Wiring{ErrorMetric::kSquared, 0.5, 0, 0.5, true},
                          Wiring{ErrorMetric::kSquared, 0.2, 0.3, 0.5, true}}) {
    const SmoothingParams p = SmoothingParams::Create(PermissibleGroups::All(64, 1.0),
                                                      w.metric, w.e1, w.e2, w.e3, w.sort);
    NoiseSource src(7);
    BudgetLedger ledger(1.0);
    const NoisyHistogram out = SmoothingModule(h, p, src, ledger);
    EXPECT_TRUE(ledger.Finalizable());
    std::map<std::size_t, double> value_of;
    for (const NoisyBin& bin : out.bins()) {
      auto [it, fresh] = value_of.emplace(*bin.label.group, *bin.value);
      if (!fresh) {
        EXPECT_EQ(it->second, *bin.value);
      }
    }
  }
}

TEST(SmoothingModuleTest, ZeroNoiseBudgetPublishesOnlyGrouping) {
  const Histogram h = FromValues({0, 0, 0, 50, 50, 50});
  const SmoothingParams p =
      SmoothingParams::Create(PermissibleGroups::All(6, 1.0), ErrorMetric::kAbsolute, 0, 1e9, 0);
  NoiseSource src(8);
  BudgetLedger ledger(1e9);
  const NoisyHistogram out = SmoothingModule(h, p, src, ledger);
  EXPECT_FALSE(out.defined());
  EXPECT_THROW(out.values(), std::logic_error);
  const GroupingStrategy g = GroupingFromLabels(out);
  ASSERT_EQ(g.size(), 2u);
  EXPECT_EQ(g[0].hi, 3u);
  EXPECT_TRUE(ledger.Finalizable());
}

TEST(SmoothingModuleTest, GroupAverageVarianceMonteCarlo) {
  // A constant histogram grouped as a whole; the published average carries
  // Lap(1/(eps3 |g|)) with variance 2/(eps3 |g|)^2.
  const std::size_t n = 8;
  const Histogram h = FromValues(std::vector<double>(n, 3.0));
  const double eps3 = 0.5;
  const SmoothingParams p = SmoothingParams::Create(PermissibleGroups::All(n, 1.0),
                                                    ErrorMetric::kAbsolute, 0, 1e9, eps3);
  double sum2 = 0.0;
  const int runs = 10000;
  for (int r = 0; r < runs; ++r) {
    NoiseSource src = NoiseSource(9).Derive(static_cast<std::uint64_t>(r));
    BudgetLedger ledger(1e9 + eps3);
    const NoisyHistogram out = SmoothingModule(h, p, src, ledger);
    ASSERT_EQ(GroupingFromLabels(out).size(), 1u);
    sum2 += (*out[0].value - 3.0) * (*out[0].value - 3.0);
  }
  const double expected = 2.0 / ((eps3 * n) * (eps3 * n));
  EXPECT_NEAR(sum2 / runs / expected, 1.0, 0.10);
}

TEST(SmoothingModuleTest, SortedGroupsMapBackToOriginalBins) {
  // Sorting brings the two high bins together although they are far apart.
  const Histogram h = FromValues({100, 0, 0, 0, 100, 0});
  const SmoothingParams p = SmoothingParams::Create(PermissibleGroups::All(6, 1.0),
                                                    ErrorMetric::kSquared, 1e9, 0, 1e9, true);
  NoiseSource src(10);
  BudgetLedger ledger(2e9);
  const NoisyHistogram out = SmoothingModule(h, p, src, ledger);
  EXPECT_EQ(out[0].label.group, out[4].label.group);
  EXPECT_NEAR(*out[0].value, 100.0, 1e-6);
  EXPECT_NEAR(*out[4].value, 100.0, 1e-6);
  EXPECT_NEAR(*out[1].value, 0.0, 1e-6);
  EXPECT_THROW(GroupingFromLabels(out), std::invalid_argument);
}

TEST(SmoothingModuleTest, RejectsMismatchedCandidates) {
  const Histogram h = FromValues({1, 2});
  const SmoothingParams p =
      SmoothingParams::Create(PermissibleGroups::All(3, 1.0), ErrorMetric::kAbsolute, 0, 1, 0);
  NoiseSource src(1);
  BudgetLedger ledger(1.0);
  EXPECT_THROW(SmoothingModule(h, p, src, ledger), std::invalid_argument);
}

}  // namespace
}  // namespace dph
