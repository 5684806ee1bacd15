// Core domain types: histograms, range queries, the privacy budget ledger,
// grouping strategies and permissible-group candidate sets.
//
// Indices carried by domain types (RangeQuery, Group, Candidate) are 1-based
// and inclusive on both ends. Containers are indexed from 0 as usual.

#ifndef DPH_CORE_H_
#define DPH_CORE_H_

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dph {

// Raised when a module tries to spend more privacy budget than remains, or
// when a ledger is finalized without exhausting its budget.
class BudgetExceededError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid scheme or module configuration (for example the forbidden
// Smoothing setting with both ordering and grouping budgets at zero).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A size guard refused to run an expensive scheme.
class GuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Opaque bin label. Grouping augments it with a group id; hierarchy levels
// mark nodes that received infinite noise as pruned.
struct Label {
  std::string name;
  std::optional<std::size_t> group;
  bool pruned = false;

  bool operator==(const Label&) const = default;
};

struct Bin {
  Label label;
  double value = 0.0;
};

// Ordered vector of labeled, non-negative, finite bin counts.
class Histogram {
 public:
  // Validates n >= 1, unique labels, finite non-negative values.
  explicit Histogram(std::vector<Bin> bins);

  // Labels are "1", "2", ..., "n".
  static Histogram FromValues(std::span<const double> values);

  std::size_t size() const { return bins_.size(); }
  const Bin& operator[](std::size_t i) const { return bins_[i]; }
  std::span<const Bin> bins() const { return bins_; }
  std::vector<double> values() const;

  // First `count` bins, used for prefix-truncated timing runs.
  Histogram Prefix(std::size_t count) const;

 private:
  std::vector<Bin> bins_;
};

// A published bin. An empty value is the UNDEFINED marker produced when a
// module publishes only structural information (zero noise budget).
struct NoisyBin {
  Label label;
  std::optional<double> value;
};

class NoisyHistogram {
 public:
  NoisyHistogram() = default;
  explicit NoisyHistogram(std::vector<NoisyBin> bins) : bins_(std::move(bins)) {}

  std::size_t size() const { return bins_.size(); }
  const NoisyBin& operator[](std::size_t i) const { return bins_[i]; }
  NoisyBin& operator[](std::size_t i) { return bins_[i]; }
  std::span<const NoisyBin> bins() const { return bins_; }

  bool defined() const;
  // Throws std::logic_error when any value is UNDEFINED.
  std::vector<double> values() const;

 private:
  std::vector<NoisyBin> bins_;
};

struct RangeQuery {
  std::size_t lo = 1;
  std::size_t hi = 1;

  std::size_t size() const { return hi - lo + 1; }
  bool operator==(const RangeQuery&) const = default;
};

// Throws std::out_of_range unless 1 <= lo <= hi <= n.
void ValidateQuery(RangeQuery q, std::size_t n);

double RangeSum(const Histogram& h, RangeQuery q);
double RangeSum(const NoisyHistogram& h, RangeQuery q);
double RangeSum(std::span<const double> values, RangeQuery q);

// out[j] = values[0] + ... + values[j]. Throws std::invalid_argument on empty
// input.
std::vector<double> PrefixSums(std::span<const double> values);

// Records every epsilon expenditure. Entries without a disjoint group compose
// sequentially (their epsilons add up). Entries sharing a disjoint group act
// on disjoint inputs and contribute the maximum of their epsilons.
class BudgetLedger {
 public:
  struct Entry {
    std::string module;
    double eps = 0.0;
    std::optional<std::string> disjoint_group;
  };

  static constexpr double kRelativeTolerance = 1e-12;

  explicit BudgetLedger(double total);

  // Throws std::invalid_argument for negative or non-finite eps and
  // BudgetExceededError when the spend would exceed the total.
  void Spend(std::string module, double eps,
             std::optional<std::string> disjoint_group = std::nullopt);

  double total() const { return total_; }
  double spent() const;
  double remaining() const { return total_ - spent(); }
  std::span<const Entry> entries() const { return entries_; }

  // True iff the spent budget equals the total within kRelativeTolerance.
  bool Finalizable() const;
  // Throws BudgetExceededError unless Finalizable().
  void Finalize() const;

 private:
  double SpentWith(const Entry* extra) const;

  double total_;
  std::vector<Entry> entries_;
};

struct Group {
  std::size_t lo = 1;
  std::size_t hi = 1;
  double cost = 0.0;

  std::size_t size() const { return hi - lo + 1; }
};

// Disjoint contiguous cover of [1, n], in ascending order.
class GroupingStrategy {
 public:
  GroupingStrategy(std::size_t n, std::vector<Group> groups);

  // Every bin in its own group, zero cost.
  static GroupingStrategy Singletons(std::size_t n);

  std::size_t n() const { return n_; }
  std::span<const Group> groups() const { return groups_; }
  std::size_t size() const { return groups_.size(); }
  const Group& operator[](std::size_t i) const { return groups_[i]; }

  // Sum of group costs, accumulated from the last group towards the first.
  double total_cost() const { return total_cost_; }

  // 0-based id of the group containing 1-based bin `bin`.
  std::size_t GroupOf(std::size_t bin) const;

 private:
  std::size_t n_;
  std::vector<Group> groups_;
  std::vector<std::size_t> group_of_;
  double total_cost_ = 0.0;
};

// A permissible group and the error parameter v of the module that will add
// noise after grouping.
struct Candidate {
  std::size_t lo = 1;
  std::size_t hi = 1;
  double v = 0.0;

  std::size_t size() const { return hi - lo + 1; }
  bool operator==(const Candidate&) const = default;
};

// The public vector L. The complete set (all n(n+1)/2 contiguous groups with
// a uniform v) is represented implicitly; other sets are explicit lists.
// Every singleton is always present, so a covering partition exists.
class PermissibleGroups {
 public:
  static PermissibleGroups All(std::size_t n, double v);
  // Throws std::invalid_argument on out-of-range or duplicate candidates, or
  // when a singleton is missing.
  static PermissibleGroups FromList(std::size_t n, std::vector<Candidate> list);

  std::size_t n() const { return n_; }
  std::size_t size() const;
  bool complete() const { return complete_; }

  // Calls fn(const Candidate&) for every candidate with the given lower
  // bound, in ascending order of hi.
  template <typename Fn>
  void ForEachStartingAt(std::size_t lo, Fn&& fn) const {
    if (complete_) {
      for (std::size_t hi = lo; hi <= n_; ++hi) fn(Candidate{lo, hi, v_});
      return;
    }
    for (std::size_t k = offsets_[lo - 1]; k < offsets_[lo]; ++k) fn(list_[k]);
  }

  std::vector<Candidate> ToList() const;

 private:
  PermissibleGroups() = default;

  std::size_t n_ = 0;
  bool complete_ = false;
  double v_ = 0.0;
  std::vector<Candidate> list_;
  std::vector<std::size_t> offsets_;
};

}  // namespace dph

#endif  // DPH_CORE_H_
