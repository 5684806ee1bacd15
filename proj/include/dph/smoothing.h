// The Smoothing module: Ordering, Grouping and Noise Addition wired in
// sequence, parameterized by (L, metric, eps1, eps2, eps3).

#ifndef DPH_SMOOTHING_H_
#define DPH_SMOOTHING_H_

#include "dph/core.h"
#include "dph/grouping.h"
#include "dph/noise.h"

namespace dph {

class SmoothingParams {
 public:
  // Throws ConfigError for negative budgets, for eps1 == eps2 == 0 (the
  // ordering connector would forward the sensitive histogram to another
  // connector) and for an empty total budget.
  //
  // `sort` controls whether Ordering sorts the noisy bins in descending order
  // (it only matters when eps1 > 0). `bias_correct` applies the squared-cost
  // correction for the noise already present in the grouping input.
  static SmoothingParams Create(PermissibleGroups candidates, ErrorMetric metric,
                                double eps1, double eps2, double eps3,
                                bool sort = true, bool bias_correct = true);

  const PermissibleGroups& candidates() const { return candidates_; }
  ErrorMetric metric() const { return metric_; }
  double eps1() const { return eps1_; }
  double eps2() const { return eps2_; }
  double eps3() const { return eps3_; }
  bool sort() const { return sort_; }
  bool bias_correct() const { return bias_correct_; }
  double total() const { return eps1_ + eps2_ + eps3_; }

 private:
  SmoothingParams(PermissibleGroups candidates, ErrorMetric metric, double eps1,
                  double eps2, double eps3, bool sort, bool bias_correct)
      : candidates_(std::move(candidates)),
        metric_(metric),
        eps1_(eps1),
        eps2_(eps2),
        eps3_(eps3),
        sort_(sort),
        bias_correct_(bias_correct) {}

  PermissibleGroups candidates_;
  ErrorMetric metric_;
  double eps1_;
  double eps2_;
  double eps3_;
  bool sort_;
  bool bias_correct_;
};

// eps1 > 0: adds Lap(1/eps1) to every bin, optionally stable-sorts the bins in
// descending noisy order, and charges eps1. eps1 == 0: returns the input
// unchanged and charges nothing.
NoisyHistogram Ordering(const Histogram& h, double eps1, bool sort,
                        NoiseSource& src, BudgetLedger& ledger);

// Runs the module and returns the smoothed histogram in the original bin
// order. Every bin's label carries the id of its group; all bins of a group
// share one published value, the group's average of the ORIGINAL values plus
// Lap(1/(eps3 |g|)). With eps3 == 0 the values are UNDEFINED and only the
// labels are meaningful. The ledger is charged eps1 + eps2 + eps3.
NoisyHistogram SmoothingModule(const Histogram& h, const SmoothingParams& params,
                               NoiseSource& src, BudgetLedger& ledger);

// Recovers a contiguous grouping from the group ids in the labels. Throws
// std::invalid_argument when a group is not contiguous in bin order (as
// happens after a sorting Ordering step).
GroupingStrategy GroupingFromLabels(const NoisyHistogram& h);

}  // namespace dph

#endif  // DPH_SMOOTHING_H_
