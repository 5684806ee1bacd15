#include "dph/core.h"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

namespace dph {
namespace {

TEST(HistogramTest, FromValuesLabelsFromOne) {
  const std::vector<double> values{3, 0, 7};
  const Histogram h = Histogram::FromValues(values);
  ASSERT_EQ(h.size(), 3u);
  EXPECT_EQ(h[0].label.name, "1");
  EXPECT_EQ(h[2].label.name, "3");
  EXPECT_EQ(h.values(), values);
}

TEST(HistogramTest, RejectsInvalidInput) {
  EXPECT_THROW(Histogram(std::vector<Bin>{}), std::invalid_argument);
  const std::vector<double> negative{1, -1};
  EXPECT_THROW(Histogram::FromValues(negative), std::invalid_argument);
  std::vector<Bin> dup{{Label{"a", std::nullopt, false}, 1.0},
                       {Label{"a", std::nullopt, false}, 2.0}};
  EXPECT_THROW(Histogram(std::move(dup)), std::invalid_argument);
}

TEST(HistogramTest, PrefixKeepsLeadingBins) {
  const std::vector<double> values{1, 2, 3, 4};
  const Histogram p = Histogram::FromValues(values).Prefix(2);
  EXPECT_EQ(p.values(), (std::vector<double>{1, 2}));
  EXPECT_THROW(Histogram::FromValues(values).Prefix(5), std::out_of_range);
}

TEST(RangeSumTest, InclusiveOneBased) {
  const std::vector<double> values{1, 2, 3, 4, 5};
  const Histogram h = Histogram::FromValues(values);
  EXPECT_DOUBLE_EQ(RangeSum(h, {2, 4}), 9.0);
  EXPECT_DOUBLE_EQ(RangeSum(h, {1, 5}), 15.0);
  EXPECT_DOUBLE_EQ(RangeSum(h, {3, 3}), 3.0);
  EXPECT_THROW(RangeSum(h, {0, 2}), std::out_of_range);
  EXPECT_THROW(RangeSum(h, {3, 2}), std::out_of_range);
  EXPECT_THROW(RangeSum(h, {1, 6}), std::out_of_range);
}

TEST(RangeSumTest, UndefinedBinsCannotBeSummed) {
  NoisyHistogram h({{Label{"1", 0, false}, std::nullopt},
                    {Label{"2", 0, false}, 2.0}});
  EXPECT_FALSE(h.defined());
  EXPECT_THROW(RangeSum(h, {1, 2}), std::logic_error);
  EXPECT_DOUBLE_EQ(RangeSum(h, {2, 2}), 2.0);
}

TEST(PrefixSumsTest, Accumulates) {
  const std::vector<double> values{1, 2, 3};
  EXPECT_EQ(PrefixSums(values), (std::vector<double>{1, 3, 6}));
  EXPECT_THROW(PrefixSums(std::vector<double>{}), std::invalid_argument);
}

TEST(BudgetLedgerTest, SequentialCompositionAdds) {
  BudgetLedger ledger(1.0);
  ledger.Spend("a", 0.25);
  ledger.Spend("b", 0.75);
  EXPECT_DOUBLE_EQ(ledger.spent(), 1.0);
  EXPECT_TRUE(ledger.Finalizable());
  EXPECT_NO_THROW(ledger.Finalize());
}

TEST(BudgetLedgerTest, DisjointGroupsContributeTheirMaximum) {
  BudgetLedger ledger(1.0);
  ledger.Spend("left", 0.5, "cells");
  ledger.Spend("right", 0.3, "cells");
  EXPECT_DOUBLE_EQ(ledger.spent(), 0.5);
  ledger.Spend("rest", 0.5);
  EXPECT_TRUE(ledger.Finalizable());
}

TEST(BudgetLedgerTest, OverspendThrowsAndLeavesLedgerUnchanged) {
  BudgetLedger ledger(1.0);
  ledger.Spend("a", 0.9);
  EXPECT_THROW(ledger.Spend("b", 0.2), BudgetExceededError);
  EXPECT_EQ(ledger.entries().size(), 1u);
  EXPECT_THROW(ledger.Finalize(), BudgetExceededError);
}

TEST(BudgetLedgerTest, RoundingWithinToleranceIsAccepted) {
  BudgetLedger ledger(1.0);
  for (int i = 0; i < 10; ++i) ledger.Spend("tenth", 0.1);
  EXPECT_TRUE(ledger.Finalizable());
  BudgetLedger short_ledger(1.0);
  short_ledger.Spend("almost", 1.0 - 1e-9);
  EXPECT_FALSE(short_ledger.Finalizable());
}

TEST(BudgetLedgerTest, RejectsBadAmounts) {
  EXPECT_THROW(BudgetLedger(0.0), std::invalid_argument);
  BudgetLedger ledger(1.0);
  EXPECT_THROW(ledger.Spend("neg", -0.1), std::invalid_argument);
  EXPECT_THROW(ledger.Spend("nan", std::nan("")), std::invalid_argument);
}

TEST(GroupingStrategyTest, CoversAndLooksUpGroups) {
  GroupingStrategy g(5, {{1, 2, 1.0}, {3, 3, 2.0}, {4, 5, 0.5}});
  EXPECT_EQ(g.size(), 3u);
  EXPECT_EQ(g.GroupOf(1), 0u);
  EXPECT_EQ(g.GroupOf(3), 1u);
  EXPECT_EQ(g.GroupOf(5), 2u);
  EXPECT_DOUBLE_EQ(g.total_cost(), 3.5);
}

TEST(GroupingStrategyTest, RejectsGapsAndOverlaps) {
  EXPECT_THROW(GroupingStrategy(4, {{1, 2, 0}, {4, 4, 0}}), std::invalid_argument);
  EXPECT_THROW(GroupingStrategy(4, {{1, 2, 0}, {2, 4, 0}}), std::invalid_argument);
  EXPECT_THROW(GroupingStrategy(4, {{1, 3, 0}}), std::invalid_argument);
}

TEST(PermissibleGroupsTest, CompleteSetHasAllContiguousGroups) {
  const PermissibleGroups all = PermissibleGroups::All(6, 2.0);
  EXPECT_TRUE(all.complete());
  EXPECT_EQ(all.size(), 21u);
  EXPECT_EQ(all.ToList().size(), 21u);
  std::vector<std::size_t> his;
  all.ForEachStartingAt(4, [&](const Candidate& c) { his.push_back(c.hi); });
  EXPECT_EQ(his, (std::vector<std::size_t>{4, 5, 6}));
}

TEST(PermissibleGroupsTest, ExplicitListNeedsSingletons) {
  std::vector<Candidate> list{{1, 1, 1}, {2, 2, 1}, {1, 2, 1}};
  const PermissibleGroups ok = PermissibleGroups::FromList(2, list);
  EXPECT_EQ(ok.size(), 3u);
  EXPECT_THROW(PermissibleGroups::FromList(2, {{1, 2, 1}, {1, 1, 1}}),
               std::invalid_argument);
  EXPECT_THROW(PermissibleGroups::FromList(2, {{1, 1, 1}, {2, 2, 1}, {2, 3, 1}}),
               std::invalid_argument);
  EXPECT_THROW(PermissibleGroups::FromList(2, {{1, 1, 1}, {1, 1, 2}, {2, 2, 1}}),
               std::invalid_argument);
}

}  // namespace
}  // namespace dph
