// The Fixed Queries module: publish cell estimates tuned to a known workload
// of (weighted) range queries.
//
// The measurement strategy is an f-ary hierarchy over the cells with one
// positive weight per level. Every node is measured once, so each cell
// appears in exactly t rows and the sensitivity is the sum of the level
// weights. A node at level ell receives Lap(sensitivity / (eps w_ell)), and
// cells are recovered by least squares with HayEstimator (the tree
// structure makes the generalized least-squares solve two linear passes).
// Level weights are picked from the lattice {1, 2, 4}^t by minimizing the
// expected workload error; the identity strategy (plain Laplace on every
// cell) competes as well.

#ifndef DPH_FIXED_QUERIES_H_
#define DPH_FIXED_QUERIES_H_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "dph/core.h"
#include "dph/hierarchy.h"
#include "dph/noise.h"

namespace dph {

// sum_{i in [lo, hi]} w_i x_i with w_lo = first_weight, w_hi = last_weight
// and 1 in between. When lo == hi the single weight is first_weight.
struct CellQuery {
  std::size_t lo = 1;
  std::size_t hi = 1;
  double first_weight = 1.0;
  double last_weight = 1.0;

  double WeightAt(std::size_t i) const;
  bool operator==(const CellQuery&) const = default;
};

double Evaluate(const CellQuery& q, std::span<const double> cells);

class Workload {
 public:
  // Throws std::invalid_argument for m == 0 and std::out_of_range for
  // queries outside [1, m].
  Workload(std::size_t m, std::vector<CellQuery> queries);

  static Workload FromRanges(std::size_t m, std::span<const RangeQuery> ranges);
  // [1, 1], [1, 2], ..., [1, m].
  static Workload Prefixes(std::size_t m);
  // All m(m+1)/2 ranges.
  static Workload AllRanges(std::size_t m);

  std::size_t m() const { return m_; }
  std::span<const CellQuery> queries() const { return queries_; }
  std::size_t size() const { return queries_.size(); }

 private:
  std::size_t m_;
  std::vector<CellQuery> queries_;
};

// Maps range queries over n bins to queries over the |G| group cells of
// `grouping`, whose values are group totals. A partially covered end group
// contributes covered_bins / |g| of its total.
Workload TransformWorkload(std::span<const RangeQuery> ranges,
                           const GroupingStrategy& grouping);

enum class FqStrategy { kIdentity, kHierarchical };

struct FqOptions {
  FqStrategy strategy = FqStrategy::kHierarchical;
  std::size_t fanout = 16;
};

// A chosen measurement strategy. Empty weights mean the identity strategy.
struct FqPlan {
  std::vector<double> weights;  // root level first
  std::size_t fanout = 16;
  double expected_error = 0.0;  // in units of 1/eps^2

  bool identity() const { return weights.empty(); }
  double sensitivity() const;
};

// Covariances of least-squares leaf estimates in a full f-ary tree of height
// t whose level-ell nodes carry noise variance level_variance[ell - 1].
// Entry d - 1 is the covariance of two leaves whose lowest common ancestor is
// at level d (entry t - 1 is the leaf variance).
std::vector<double> LeafCovarianceByAncestor(std::size_t fanout,
                                             std::span<const double> level_variance);

// Expected total squared error of the workload under a plan, at eps = 1.
// For hierarchical plans the tree is modeled as full (padding leaves are
// treated like real ones).
double ExpectedWorkloadError(const Workload& workload, const FqPlan& plan);

// Identity plan, or the hierarchical weights minimizing the expected error
// (first minimum in lexicographic lattice order). Trees with more than five
// levels share weights across five contiguous bands of levels. With
// kHierarchical the identity plan is kept when it is strictly better.
FqPlan ChooseStrategy(const Workload& workload, const FqOptions& options);

struct FqReport {
  FqPlan plan;
};

// Publishes noisy cell estimates for the workload, charging eps once under
// `module`. Throws std::invalid_argument for an empty workload or a size
// mismatch.
NoisyHistogram FixedQueries(const Histogram& cells, const Workload& workload,
                            double eps, NoiseSource& src, BudgetLedger& ledger,
                            const FqOptions& options = {},
                            std::string module = "fixed_queries",
                            FqReport* report = nullptr);

// Measures and recovers with an explicit plan. Exposed for tests.
std::vector<double> MeasureAndRecover(std::span<const double> cells,
                                      const FqPlan& plan, double eps,
                                      NoiseSource& src);

}  // namespace dph

#endif  // DPH_FIXED_QUERIES_H_
