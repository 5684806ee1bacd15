// The nine published schemes and the query processor over their outputs.

#ifndef DPH_SCHEMES_H_
#define DPH_SCHEMES_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dph/core.h"
#include "dph/fixed_queries.h"
#include "dph/grouping.h"
#include "dph/hierarchy.h"
#include "dph/noise.h"

namespace dph {

enum class SchemeKind { kLpa, kH, kS1, kSApprox, kS2, kSo, kDawaLike, kSub, kSps };

inline constexpr SchemeKind kAllSchemes[] = {
    SchemeKind::kLpa, SchemeKind::kH,        SchemeKind::kS1,
    SchemeKind::kSApprox, SchemeKind::kS2,   SchemeKind::kSo,
    SchemeKind::kDawaLike, SchemeKind::kSub, SchemeKind::kSps};

// Lower-case CLI names: lpa, h, s1, s-approx, s2, so, dawa, sub, sps.
std::string_view SchemeName(SchemeKind kind);
// Throws std::invalid_argument for an unknown name.
SchemeKind ParseScheme(std::string_view name);

std::string_view MetricName(ErrorMetric metric);
ErrorMetric ParseMetric(std::string_view name);
std::string_view AllocationName(BudgetAllocation allocation);
BudgetAllocation ParseAllocation(std::string_view name);
std::string_view FqStrategyName(FqStrategy strategy);
FqStrategy ParseFqStrategy(std::string_view name);

// The largest histogram DAWA_LIKE accepts without `force`.
inline constexpr std::size_t kDawaGuard = 1024;

struct SchemeConfig {
  SchemeKind kind = SchemeKind::kLpa;
  double eps = 1.0;
  std::size_t fanout = 16;
  // Grouping metric; empty means the scheme's default (squared for S2, SO
  // and SUB, absolute otherwise).
  std::optional<ErrorMetric> metric;
  std::uint64_t seed = 0;
  BudgetAllocation allocation = BudgetAllocation::kGeometric;
  FqStrategy fq_strategy = FqStrategy::kHierarchical;
  bool force = false;
};

ErrorMetric DefaultMetric(SchemeKind kind);

// Published output of a scheme: a noisy histogram, a noisy tree (answered
// through consistent estimates) or a noisy prefix-sum vector.
class NoisyStructure {
 public:
  using Payload = std::variant<NoisyHistogram, HayEstimator, std::vector<double>>;

  NoisyStructure(SchemeKind kind, Payload payload, BudgetLedger ledger,
                 std::optional<GroupingStrategy> grouping, std::uint64_t seed);

  SchemeKind kind() const { return kind_; }
  const Payload& payload() const { return payload_; }
  const BudgetLedger& ledger() const { return ledger_; }
  const std::optional<GroupingStrategy>& grouping() const { return grouping_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t n() const;

  // "histogram", "tree" or "prefix".
  std::string_view variant_name() const;

  // Range sum, by bin summation, consistent tree estimate, or
  // s[hi] - s[lo - 1].
  double Answer(RangeQuery q) const;

 private:
  SchemeKind kind_;
  Payload payload_;
  BudgetLedger ledger_;
  std::optional<GroupingStrategy> grouping_;
  std::uint64_t seed_;
};

// Builds the scheme's structure. The ledger must finalize at exactly eps.
// Throws ConfigError for invalid settings, GuardError when DAWA_LIKE exceeds
// kDawaGuard bins without force, BudgetExceededError on accounting faults.
NoisyStructure RunScheme(const Histogram& h, const SchemeConfig& config);

// The permissible groups of subtree smoothing: the leaf spans of all full
// subtrees of the fanout-f tree over n bins, singletons included.
PermissibleGroups SubtreeCandidates(std::size_t n, std::size_t fanout, double v);

// The noisy tree of subtree smoothing for a given grouping, whose groups must
// be leaf spans of full subtrees. Descendants of group roots are pruned; the
// budget eps_tree is split over levels by `allocation`. Each pruned level of
// a group's subtree contributes one noisy measurement of the subtree total,
// and the group root's value is the plain average of these and its own
// measurement. Pruned nodes are refilled with an even split of that value.
AggregateTree SubtreeTree(const Histogram& h, const GroupingStrategy& grouping,
                          double eps_tree, std::size_t fanout,
                          BudgetAllocation allocation, NoiseSource& src,
                          BudgetLedger& ledger);

// Full SUB pipeline: grouping with (0, eps/4, 0) over SubtreeCandidates with
// v = 4t/(3 eps), then SubtreeTree with 3 eps / 4.
HayEstimator SubtreeSmooth(const Histogram& h, double eps, std::size_t fanout,
                           ErrorMetric metric, BudgetAllocation allocation,
                           NoiseSource& src, BudgetLedger& ledger,
                           GroupingStrategy* grouping_out = nullptr);

}  // namespace dph

#endif  // DPH_SCHEMES_H_
