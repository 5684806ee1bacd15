// Grouping cost engines and the dynamic-programming partition optimizer for
// the absolute (err1) and squared (err2) error metrics.

#ifndef DPH_GROUPING_H_
#define DPH_GROUPING_H_

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dph/core.h"
#include "dph/noise.h"

namespace dph {

enum class ErrorMetric { kAbsolute, kSquared };

// sum_{j in [lo, hi]} |b_j - mean| + v, evaluated directly.
double AbsoluteCost(std::span<const double> values, std::size_t lo,
                    std::size_t hi, double v);

// sum b^2 - (sum b)^2 / |g| + v^2 from prefix sums of the values and of their
// squares (both as produced by PrefixSums, length n).
double SquaredCost(std::span<const double> prefix1,
                   std::span<const double> prefix2, std::size_t lo,
                   std::size_t hi, double v);

// The amount 2(|g| - 1) / eps^2 by which noise inflates the squared cost of a
// group of bins perturbed with Lap(1/eps).
double BiasCorrection(std::size_t group_size, double eps);

// O(1) squared deviation of any contiguous group. Values are centered on
// their mean before the prefix sums are formed, which keeps the cancellation
// in sum b^2 - (sum b)^2/|g| small.
class SquaredCostEngine {
 public:
  explicit SquaredCostEngine(std::span<const double> values);

  // sum_{j in [lo, hi]} (b_j - mean)^2, never negative.
  double Deviation(std::size_t lo, std::size_t hi) const;

  // Unevaluated sum hi + lo carrying about 106 significant bits; keeps the
  // difference s2 - s1^2/len accurate when a group sits far from the mean.
  struct Wide {
    double hi = 0.0;
    double lo = 0.0;
  };

 private:
  std::vector<Wide> prefix1_;  // prefix1_[j] = sum of first j centered values
  std::vector<Wide> prefix2_;
};

// Absolute deviation of [lo, hi] for a fixed lo and growing hi. Keeps a
// Fenwick index over value ranks so each extension and each evaluation costs
// O(log n); Reset clears only the slots it touched.
class AbsoluteSweep {
 public:
  explicit AbsoluteSweep(std::span<const double> values);

  void Reset(std::size_t lo);
  // Extends the group to [lo, hi] (hi must not decrease) and returns
  // sum |b_j - mean| over it.
  double ExtendTo(std::size_t hi);

 private:
  void Insert(std::size_t index);

  std::vector<double> values_;
  std::vector<double> sorted_;
  std::vector<std::size_t> rank_;
  std::vector<std::int64_t> count_tree_;
  std::vector<double> sum_tree_;
  std::vector<std::size_t> touched_;
  std::size_t lo_ = 1;
  std::size_t hi_ = 0;
  double total_ = 0.0;
};

// Absolute deviation of arbitrary contiguous groups in O(log n) each, via a
// persistent segment tree over value ranks (one version per prefix).
class RangeAbsoluteCost {
 public:
  explicit RangeAbsoluteCost(std::span<const double> values);

  double Deviation(std::size_t lo, std::size_t hi) const;

 private:
  struct Node {
    std::int32_t left = 0;
    std::int32_t right = 0;
    std::int64_t count = 0;
    double sum = 0.0;
  };

  std::int32_t Insert(std::int32_t prev, std::size_t l, std::size_t r,
                      std::size_t rank, double value);

  std::size_t size_ = 0;
  std::vector<double> sorted_;
  std::vector<double> prefix_;
  std::vector<Node> nodes_;
  std::vector<std::int32_t> roots_;
};

struct GroupingStats {
  std::size_t cost_evaluations = 0;
};

// Minimizes the total candidate cost over all covers of [1, n] built from
// the permissible groups. Ties go to fewer groups, then to the longest
// leftmost group.
//
// cost_of(const Candidate&) is called exactly once per candidate, with lower
// bounds from n down to 1 and, for each lower bound, in ascending hi. Totals
// accumulate from the right (cost + best suffix).
template <typename CostFn>
GroupingStrategy PartitionByDp(const PermissibleGroups& candidates,
                               CostFn&& cost_of,
                               GroupingStats* stats = nullptr) {
  const std::size_t n = candidates.n();
  std::vector<double> best(n + 2, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> count(n + 2, 0);
  std::vector<std::size_t> next_hi(n + 2, 0);
  std::vector<double> chosen_cost(n + 2, 0.0);
  std::vector<char> feasible(n + 2, 0);
  best[n + 1] = 0.0;
  feasible[n + 1] = 1;
  std::size_t evaluations = 0;

  for (std::size_t lo = n; lo >= 1; --lo) {
    candidates.ForEachStartingAt(lo, [&](const Candidate& c) {
      const double cost = cost_of(c);
      ++evaluations;
      if (!feasible[c.hi + 1] || std::isnan(cost)) return;
      const double total = cost + best[c.hi + 1];
      const std::size_t groups = count[c.hi + 1] + 1;
      const bool better =
          !feasible[lo] || total < best[lo] ||
          (total == best[lo] &&
           (groups < count[lo] || (groups == count[lo] && c.hi > next_hi[lo])));
      if (better) {
        feasible[lo] = 1;
        best[lo] = total;
        count[lo] = groups;
        next_hi[lo] = c.hi;
        chosen_cost[lo] = cost;
      }
    });
    if (!feasible[lo]) {
      throw std::invalid_argument("no cover of position " + std::to_string(lo) +
                                  " exists among the permissible groups");
    }
  }
  if (stats != nullptr) stats->cost_evaluations += evaluations;

  std::vector<Group> groups;
  groups.reserve(count[1]);
  for (std::size_t lo = 1; lo <= n; lo = next_hi[lo] + 1) {
    groups.push_back(Group{lo, next_hi[lo], chosen_cost[lo]});
  }
  return GroupingStrategy(n, std::move(groups));
}

// All intervals [l, l + 2^k - 1] inside [1, n], with uniform v.
PermissibleGroups DyadicCandidates(std::size_t n, double v);

// Private-cost grouping for the absolute metric. With eps2 > 0 each candidate
// cost c_i gets Lap(1/(eps2 |g_i|)) added and eps2 is charged to the ledger;
// with eps2 == 0 the costs are used as-is (the caller guarantees `values` is
// already private).
GroupingStrategy GroupAbsoluteDp(std::span<const double> values, double eps2,
                                 const PermissibleGroups& candidates,
                                 NoiseSource& src, BudgetLedger& ledger,
                                 std::string module = "grouping",
                                 GroupingStats* stats = nullptr);

// Optimal O(n^2) squared-metric grouping over values already perturbed with
// Lap(1/noise_eps). With bias_correct, every cost is reduced by
// BiasCorrection(|g|, noise_eps). Spends no budget.
GroupingStrategy GroupSquaredOptimal(std::span<const double> noisy_values,
                                     double noise_eps,
                                     const PermissibleGroups& candidates,
                                     bool bias_correct,
                                     GroupingStats* stats = nullptr);

}  // namespace dph

#endif  // DPH_GROUPING_H_
