#include "dph/grouping.h"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <map>
#include <utility>
#include <vector>

namespace dph {
namespace {

std::vector<double> RandomValues(NoiseSource& src, std::size_t n, std::uint64_t top) {
  std::vector<double> values(n);
  for (double& v : values) v = static_cast<double>(src.UniformInt(0, top));
  return values;
}

// Two-pass squared deviation.
double NaiveSquared(const std::vector<double>& values, std::size_t lo, std::size_t hi) {
  double sum = 0.0;
  for (std::size_t j = lo; j <= hi; ++j) sum += values[j - 1];
  const double mean = sum / static_cast<double>(hi - lo + 1);
  double dev = 0.0;
  for (std::size_t j = lo; j <= hi; ++j) dev += (values[j - 1] - mean) * (values[j - 1] - mean);
  return dev;
}

using CostTable = std::map<std::pair<std::size_t, std::size_t>, double>;

// Minimum over every contiguous partition allowed by the table, enumerated as
// the 2^(n-1) cut patterns. Totals are summed from the last group back, the
// order the optimizer uses.
double ExhaustiveMinimum(std::size_t n, const CostTable& costs) {
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t cuts = 0; cuts < (std::uint64_t{1} << (n - 1)); ++cuts) {
    std::vector<std::pair<std::size_t, std::size_t>> groups;
    std::size_t lo = 1;
    for (std::size_t i = 1; i <= n; ++i) {
      if (i == n || ((cuts >> (i - 1)) & 1)) {
        groups.emplace_back(lo, i);
        lo = i + 1;
      }
    }
    double total = 0.0;
    bool allowed = true;
    for (auto it = groups.rbegin(); it != groups.rend(); ++it) {
      auto found = costs.find(*it);
      if (found == costs.end()) {
        allowed = false;
        break;
      }
      total = found->second + total;
    }
    if (allowed) best = std::min(best, total);
  }
  return best;
}

TEST(CostTest, AbsoluteCostByHand) {
  const std::vector<double> values{1, 2, 6};
  EXPECT_DOUBLE_EQ(AbsoluteCost(values, 1, 3, 0.5), 2 + 1 + 3 + 0.5);
  EXPECT_DOUBLE_EQ(AbsoluteCost(values, 2, 2, 1.0), 1.0);
  EXPECT_THROW(AbsoluteCost(values, 2, 4, 0.0), std::out_of_range);
}

TEST(CostTest, SquaredCostFromPrefixSums) {
  const std::vector<double> values{1, 2, 6};
  std::vector<double> squares;
  for (double v : values) squares.push_back(v * v);
  const auto p1 = PrefixSums(values);
  const auto p2 = PrefixSums(squares);
  EXPECT_NEAR(SquaredCost(p1, p2, 1, 3, 2.0), 14.0 + 4.0, 1e-12);
  EXPECT_NEAR(SquaredCost(p1, p2, 2, 3, 0.0), 8.0, 1e-12);
}

TEST(CostTest, BiasCorrectionFormula) {
  EXPECT_DOUBLE_EQ(BiasCorrection(1, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(BiasCorrection(4, 0.5), 24.0);
  EXPECT_THROW(BiasCorrection(3, 0.0), std::invalid_argument);
  EXPECT_THROW(BiasCorrection(0, 1.0), std::invalid_argument);
}

TEST(CostTest, BiasCorrectionMatchesNoiseInflation) {
  // E[squared deviation of Lap(1/eps) noise over a group] = 2(|g|-1)/eps^2.
  NoiseSource src(21);
  const double eps = 0.8;
  const std::size_t g = 6;
  double sum = 0.0;
  const int runs = 40000;
  for (int r = 0; r < runs; ++r) {
    std::vector<double> noise(g);
    for (double& x : noise) x = SampleLaplace(src, 1.0 / eps);
    sum += NaiveSquared(noise, 1, g);
  }
  EXPECT_NEAR(sum / runs / BiasCorrection(g, eps), 1.0, 0.03);
}

TEST(SquaredCostEngineTest, MatchesTwoPassOnEveryGroup) {
  NoiseSource src(2);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 1 + src.UniformInt(0, 127);
    std::vector<double> values(n);
    for (double& v : values) v = 1e4 * src.Uniform() + SampleLaplace(src, 3.0);
    const SquaredCostEngine engine(values);
    for (std::size_t lo = 1; lo <= n; ++lo) {
      for (std::size_t hi = lo; hi <= n; ++hi) {
        const double naive = NaiveSquared(values, lo, hi);
        ASSERT_NEAR(engine.Deviation(lo, hi), naive, 1e-9 * std::max(1.0, naive));
      }
    }
  }
}

TEST(AbsoluteSweepTest, MatchesDirectEvaluation) {
  NoiseSource src(3);
  const std::vector<double> values = RandomValues(src, 60, 20);
  AbsoluteSweep sweep(values);
  for (std::size_t lo = 1; lo <= values.size(); ++lo) {
    sweep.Reset(lo);
    for (std::size_t hi = lo; hi <= values.size(); ++hi) {
      ASSERT_NEAR(sweep.ExtendTo(hi), AbsoluteCost(values, lo, hi, 0.0), 1e-9);
    }
  }
}

TEST(RangeAbsoluteCostTest, MatchesDirectEvaluation) {
  NoiseSource src(4);
  std::vector<double> values(50);
  for (double& v : values) v = 100.0 * src.Uniform();
  const RangeAbsoluteCost cost(values);
  for (std::size_t lo = 1; lo <= values.size(); ++lo) {
    for (std::size_t hi = lo; hi <= values.size(); ++hi) {
      ASSERT_NEAR(cost.Deviation(lo, hi), AbsoluteCost(values, lo, hi, 0.0), 1e-9);
    }
  }
}

TEST(PartitionByDpTest, EqualsExhaustiveMinimum) {
  NoiseSource src(5);
  for (int instance = 0; instance < 200; ++instance) {
    const std::size_t n = 1 + src.UniformInt(0, 9);
    const std::vector<double> values = RandomValues(src, n, 10);
    const bool squared = instance % 2 == 1;
    const double v = 3.0 * src.Uniform();
    const PermissibleGroups all = PermissibleGroups::All(n, v);
    CostTable table;
    for (std::size_t lo = 1; lo <= n; ++lo) {
      for (std::size_t hi = lo; hi <= n; ++hi) {
        const double base = squared ? NaiveSquared(values, lo, hi) + v * v
                                    : AbsoluteCost(values, lo, hi, v);
        table[{lo, hi}] = base + SampleLaplace(src, 1.0);
      }
    }
    const GroupingStrategy g =
        PartitionByDp(all, [&](const Candidate& c) { return table.at({c.lo, c.hi}); });
    ASSERT_EQ(g.total_cost(), ExhaustiveMinimum(n, table)) << "instance " << instance;
  }
}

TEST(PartitionByDpTest, RespectsRestrictedCandidates) {
  NoiseSource src(6);
  for (int instance = 0; instance < 50; ++instance) {
    const std::size_t n = 1 + src.UniformInt(0, 9);
    const PermissibleGroups dyadic = DyadicCandidates(n, 1.0);
    CostTable table;
    for (const Candidate& c : dyadic.ToList()) table[{c.lo, c.hi}] = SampleLaplace(src, 2.0);
    const GroupingStrategy g =
        PartitionByDp(dyadic, [&](const Candidate& c) { return table.at({c.lo, c.hi}); });
    ASSERT_EQ(g.total_cost(), ExhaustiveMinimum(n, table));
    for (const Group& group : g.groups()) {
      ASSERT_TRUE(table.contains({group.lo, group.hi}));
    }
  }
}

TEST(PartitionByDpTest, TiesPreferFewerGroups) {
  const PermissibleGroups all = PermissibleGroups::All(3, 0.0);
  const GroupingStrategy g = PartitionByDp(all, [](const Candidate&) { return 0.0; });
  ASSERT_EQ(g.size(), 1u);
  EXPECT_EQ(g[0].hi, 3u);
}

TEST(PartitionByDpTest, SmallSquaredExample) {
  const std::vector<double> values{0, 0, 10, 10};
  const GroupingStrategy g = GroupSquaredOptimal(values, 1.0, PermissibleGroups::All(4, 1.0),
                                                 /*bias_correct=*/false);
  ASSERT_EQ(g.size(), 2u);
  EXPECT_EQ(g[0].hi, 2u);
  EXPECT_EQ(g[1].lo, 3u);
  EXPECT_DOUBLE_EQ(g.total_cost(), 2.0);
}

TEST(PartitionByDpTest, EvaluatesEveryCandidateOnce) {
  for (std::size_t n : {1u, 7u, 128u}) {
    GroupingStats stats;
    const std::vector<double> values(n, 1.0);
    GroupSquaredOptimal(values, 1.0, PermissibleGroups::All(n, 1.0), true, &stats);
    EXPECT_EQ(stats.cost_evaluations, n * (n + 1) / 2);
  }
}

TEST(DyadicCandidatesTest, PowerOfTwoLengths) {
  const PermissibleGroups d = DyadicCandidates(5, 2.0);
  // Lengths 1 (5), 2 (4), 4 (2).
  EXPECT_EQ(d.size(), 11u);
  for (const Candidate& c : d.ToList()) {
    const std::size_t len = c.size();
    EXPECT_EQ(len & (len - 1), 0u);
    EXPECT_EQ(c.v, 2.0);
  }
}

TEST(GroupAbsoluteDpTest, ChargesOnlyWhenNoisy) {
  const std::vector<double> values{5, 5, 5, 0, 0, 0};
  NoiseSource src(7);
  BudgetLedger ledger(1.0);
  const GroupingStrategy exact =
      GroupAbsoluteDp(values, 0.0, PermissibleGroups::All(6, 1.0), src, ledger);
  EXPECT_EQ(ledger.spent(), 0.0);
  EXPECT_EQ(src.position(), 0u);
  ASSERT_EQ(exact.size(), 2u);
  EXPECT_EQ(exact[0].hi, 3u);
  GroupAbsoluteDp(values, 0.25, PermissibleGroups::All(6, 1.0), src, ledger, "g");
  EXPECT_DOUBLE_EQ(ledger.spent(), 0.25);
  EXPECT_EQ(src.position(), 21u);
}

TEST(GroupAbsoluteDpTest, CompleteAndExplicitSetsAgree) {
  NoiseSource data(8);
  const std::vector<double> values = RandomValues(data, 30, 50);
  NoiseSource a(9);
  NoiseSource b(9);
  BudgetLedger la(1.0);
  BudgetLedger lb(1.0);
  const GroupingStrategy implicit =
      GroupAbsoluteDp(values, 0.5, PermissibleGroups::All(30, 2.0), a, la);
  const GroupingStrategy listed = GroupAbsoluteDp(
      values, 0.5, PermissibleGroups::FromList(30, PermissibleGroups::All(30, 2.0).ToList()),
      b, lb);
  ASSERT_EQ(implicit.size(), listed.size());
  for (std::size_t i = 0; i < implicit.size(); ++i) {
    EXPECT_EQ(implicit[i].lo, listed[i].lo);
    EXPECT_EQ(implicit[i].hi, listed[i].hi);
    EXPECT_NEAR(implicit[i].cost, listed[i].cost, 1e-9);
  }
}

// Cubic reference: every group cost recomputed from scratch.
GroupingStrategy CubicSquared(const std::vector<double>& noisy, double eps, double v) {
  const std::size_t n = noisy.size();
  std::vector<double> best(n + 2, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> count(n + 2, 0);
  std::vector<std::size_t> next(n + 2, 0);
  best[n + 1] = 0.0;
  for (std::size_t lo = n; lo >= 1; --lo) {
    for (std::size_t hi = lo; hi <= n; ++hi) {
      const double cost =
          NaiveSquared(noisy, lo, hi) + v * v - 2.0 * static_cast<double>(hi - lo) / (eps * eps);
      const double total = cost + best[hi + 1];
      const std::size_t groups = count[hi + 1] + 1;
      if (total < best[lo] ||
          (total == best[lo] && (groups < count[lo] || (groups == count[lo] && hi > next[lo])))) {
        best[lo] = total;
        count[lo] = groups;
        next[lo] = hi;
      }
    }
  }
  std::vector<Group> groups;
  for (std::size_t lo = 1; lo <= n; lo = next[lo] + 1) groups.push_back({lo, next[lo], 0.0});
  return GroupingStrategy(n, std::move(groups));
}

TEST(GroupSquaredOptimalTest, MatchesCubicReference) {
  NoiseSource src(10);
  for (int instance = 0; instance < 60; ++instance) {
    const std::size_t n = 1 + src.UniformInt(0, 63);
    const double eps = 0.25 + src.Uniform();
    std::vector<double> noisy = RandomValues(src, n, 30);
    for (double& x : noisy) x += SampleLaplace(src, 1.0 / eps);
    const double v = 1.0 / eps;
    const GroupingStrategy fast =
        GroupSquaredOptimal(noisy, eps, PermissibleGroups::All(n, v), true);
    const GroupingStrategy slow = CubicSquared(noisy, eps, v);
    ASSERT_EQ(fast.size(), slow.size()) << "instance " << instance;
    for (std::size_t i = 0; i < fast.size(); ++i) {
      ASSERT_EQ(fast[i].lo, slow[i].lo);
      ASSERT_EQ(fast[i].hi, slow[i].hi);
    }
  }
}

TEST(GroupSquaredOptimalTest, RequiresNoiseBudgetForCorrection) {
  const std::vector<double> values{1, 2};
  EXPECT_THROW(GroupSquaredOptimal(values, 0.0, PermissibleGroups::All(2, 1.0), true),
               std::invalid_argument);
  EXPECT_NO_THROW(GroupSquaredOptimal(values, 0.0, PermissibleGroups::All(2, 1.0), false));
}

}  // namespace
}  // namespace dph
