// Aggregate trees, per-level budget allocation, the Hierarchy Level module
// and weighted mean-consistency inference.
//
// Levels are numbered 1 (root) to t (leaves). A tree over n bins with fanout
// f has t = ceil(log_f n) + 1 levels and f^(t-1) leaf positions; positions
// past n are padding. Only the real prefix of each level is stored, padding
// nodes are exact zeros.

#ifndef DPH_HIERARCHY_H_
#define DPH_HIERARCHY_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dph/core.h"
#include "dph/noise.h"

namespace dph {

enum class BudgetAllocation { kGeometric, kUniform };

// Geometric allocation ratio between consecutive levels.
inline const double kGeometricRatio = 1.2599210498948732;  // 2^(1/3)

// alpha_1 .. alpha_t (index 0 is the root level). Geometric weights grow by
// kGeometricRatio towards the leaves; both allocations sum to t.
std::vector<double> LevelWeights(std::size_t t, BudgetAllocation allocation);

// alpha_ell * eps.
double ScaleBudget(double eps, std::size_t t, std::size_t ell,
                   BudgetAllocation allocation = BudgetAllocation::kGeometric);

// ceil(log_f n) + 1.
std::size_t TreeHeight(std::size_t n, std::size_t fanout);

// One level of a tree. A variance of 0 marks an exact value, +inf a value that
// carries no information (pruned or never measured).
struct TreeLevel {
  std::vector<double> values;
  std::vector<double> variances;
  std::vector<std::uint8_t> pruned;

  std::size_t size() const { return values.size(); }
};

class AggregateTree {
 public:
  // Exact tree: every internal node is the sum of its children, variances 0.
  // Throws std::invalid_argument for n == 0 or fanout < 2.
  static AggregateTree Build(std::span<const double> values, std::size_t fanout);

  // Assembles a tree from per-level data; level sizes must match the shape.
  AggregateTree(std::size_t n, std::size_t fanout, std::vector<TreeLevel> levels);

  std::size_t n() const { return n_; }
  std::size_t fanout() const { return fanout_; }
  std::size_t height() const { return levels_.size(); }

  // Number of real (non-padding) nodes on a level.
  std::size_t LevelSize(std::size_t ell) const;
  // Leaf positions below one node of the level: f^(t - ell).
  std::size_t Span(std::size_t ell) const;
  // Bins covered by node i (0-based) of a level, clipped to [1, n].
  RangeQuery LeafRange(std::size_t ell, std::size_t i) const;

  const TreeLevel& level(std::size_t ell) const { return levels_.at(ell - 1); }
  TreeLevel& mutable_level(std::size_t ell) { return levels_.at(ell - 1); }

 private:
  std::size_t n_;
  std::size_t fanout_;
  std::vector<TreeLevel> levels_;
};

// The Hierarchy Level module. Nodes with mask 1 receive Lap(1/eps_level);
// nodes with mask 0 get infinite noise: no sample is drawn, the value is
// discarded and the node is flagged as pruned. eps_level is charged once.
TreeLevel HierarchyLevel(std::span<const double> level_values,
                         std::span<const std::uint8_t> mask, double eps_level,
                         NoiseSource& src, BudgetLedger& ledger,
                         std::string module = "hierarchy");

// Minimum-variance consistent estimates for every node of a noisy tree.
//
// Upward pass: each node blends its own measurement with the sum of its
// children's estimates by inverse variance. Downward pass: the parent's final
// value minus the children's estimates is shared among the children in
// proportion to their variances, so a child with no information absorbs the
// whole residual and siblings without information split it evenly.
class HayEstimator {
 public:
  explicit HayEstimator(AggregateTree noisy);

  const AggregateTree& noisy() const { return noisy_; }
  std::span<const double> consistent(std::size_t ell) const {
    return consistent_.at(ell - 1);
  }
  // Variance of the upward-pass estimate of each node.
  std::span<const double> upward_variance(std::size_t ell) const {
    return upward_variance_.at(ell - 1);
  }
  std::size_t n() const { return noisy_.n(); }

  // Canonical-cover sum over the consistent node values.
  double Answer(RangeQuery q) const;
  std::vector<double> Leaves() const;

 private:
  AggregateTree noisy_;
  std::vector<std::vector<double>> consistent_;
  std::vector<std::vector<double>> upward_variance_;
};

double HayEstimate(const HayEstimator& estimator, RangeQuery q);

// Canonical cover of q as (level, index) pairs: at most 2(f - 1) nodes per
// level, no node fully inside a chosen ancestor.
struct TreeNodeRef {
  std::size_t level = 1;
  std::size_t index = 0;
};
std::vector<TreeNodeRef> CanonicalCover(std::size_t n, std::size_t fanout,
                                        RangeQuery q);

// Sum of the raw noisy values of the canonical cover. Throws
// std::logic_error if a cover node carries no information.
double CanonicalCoverSum(const AggregateTree& tree, RangeQuery q);

}  // namespace dph

#endif  // DPH_HIERARCHY_H_
