#include "dph/core.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <unordered_set>
#include <utility>

namespace dph {

Histogram::Histogram(std::vector<Bin> bins) : bins_(std::move(bins)) {
  if (bins_.empty()) {
    throw std::invalid_argument("histogram must contain at least one bin");
  }
  std::unordered_set<std::string> seen;
  seen.reserve(bins_.size());
  for (const Bin& bin : bins_) {
    if (!std::isfinite(bin.value) || bin.value < 0.0) {
      throw std::invalid_argument("bin '" + bin.label.name +
                                  "' has a negative or non-finite value");
    }
    if (!seen.insert(bin.label.name).second) {
      throw std::invalid_argument("duplicate bin label '" + bin.label.name +
                                  "'");
    }
  }
}

Histogram Histogram::FromValues(std::span<const double> values) {
  std::vector<Bin> bins;
  bins.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    bins.push_back(Bin{Label{std::to_string(i + 1), std::nullopt, false}, values[i]});
  }
  return Histogram(std::move(bins));
}

std::vector<double> Histogram::values() const {
  std::vector<double> out(bins_.size());
  for (std::size_t i = 0; i < bins_.size(); ++i) out[i] = bins_[i].value;
  return out;
}

Histogram Histogram::Prefix(std::size_t count) const {
  if (count == 0 || count > bins_.size()) {
    throw std::out_of_range("prefix length out of range");
  }
  return Histogram(std::vector<Bin>(bins_.begin(), bins_.begin() + count));
}

bool NoisyHistogram::defined() const {
  return std::all_of(bins_.begin(), bins_.end(),
                     [](const NoisyBin& b) { return b.value.has_value(); });
}

std::vector<double> NoisyHistogram::values() const {
  std::vector<double> out(bins_.size());
  for (std::size_t i = 0; i < bins_.size(); ++i) {
    if (!bins_[i].value) {
      throw std::logic_error("bin '" + bins_[i].label.name +
                             "' carries an UNDEFINED value");
    }
    out[i] = *bins_[i].value;
  }
  return out;
}

void ValidateQuery(RangeQuery q, std::size_t n) {
  if (q.lo < 1 || q.lo > q.hi || q.hi > n) {
    throw std::out_of_range("range [" + std::to_string(q.lo) + ", " +
                            std::to_string(q.hi) + "] invalid for " +
                            std::to_string(n) + " bins");
  }
}

double RangeSum(std::span<const double> values, RangeQuery q) {
  ValidateQuery(q, values.size());
  double sum = 0.0;
  for (std::size_t i = q.lo - 1; i < q.hi; ++i) sum += values[i];
  return sum;
}

double RangeSum(const Histogram& h, RangeQuery q) {
  ValidateQuery(q, h.size());
  double sum = 0.0;
  for (std::size_t i = q.lo - 1; i < q.hi; ++i) sum += h[i].value;
  return sum;
}

double RangeSum(const NoisyHistogram& h, RangeQuery q) {
  ValidateQuery(q, h.size());
  double sum = 0.0;
  for (std::size_t i = q.lo - 1; i < q.hi; ++i) {
    if (!h[i].value) {
      throw std::logic_error("range covers an UNDEFINED bin");
    }
    sum += *h[i].value;
  }
  return sum;
}

std::vector<double> PrefixSums(std::span<const double> values) {
  if (values.empty()) {
    throw std::invalid_argument("prefix sums of an empty vector");
  }
  std::vector<double> out(values.size());
  double running = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    running += values[i];
    out[i] = running;
  }
  return out;
}

BudgetLedger::BudgetLedger(double total) : total_(total) {
  if (!std::isfinite(total) || total <= 0.0) {
    throw std::invalid_argument("ledger total must be finite and positive");
  }
}

double BudgetLedger::SpentWith(const Entry* extra) const {
  double sequential = 0.0;
  std::map<std::string, double> parallel;
  auto account = [&](const Entry& e) {
    if (e.disjoint_group) {
      double& slot = parallel[*e.disjoint_group];
      slot = std::max(slot, e.eps);
    } else {
      sequential += e.eps;
    }
  };
  for (const Entry& e : entries_) account(e);
  if (extra != nullptr) account(*extra);
  for (const auto& [group, eps] : parallel) sequential += eps;
  return sequential;
}

double BudgetLedger::spent() const { return SpentWith(nullptr); }

void BudgetLedger::Spend(std::string module, double eps,
                         std::optional<std::string> disjoint_group) {
  if (!std::isfinite(eps) || eps < 0.0) {
    throw std::invalid_argument("module '" + module +
                                "' requested a negative or non-finite budget");
  }
  Entry entry{std::move(module), eps, std::move(disjoint_group)};
  const double after = SpentWith(&entry);
  if (after > total_ * (1.0 + kRelativeTolerance)) {
    throw BudgetExceededError("module '" + entry.module + "' spends " +
                              std::to_string(eps) + ", exceeding the total " +
                              std::to_string(total_) + " (would reach " +
                              std::to_string(after) + ")");
  }
  entries_.push_back(std::move(entry));
}

bool BudgetLedger::Finalizable() const {
  return std::abs(spent() - total_) <= kRelativeTolerance * total_;
}

void BudgetLedger::Finalize() const {
  if (!Finalizable()) {
    throw BudgetExceededError("ledger not exhausted: spent " +
                              std::to_string(spent()) + " of " +
                              std::to_string(total_));
  }
}

GroupingStrategy::GroupingStrategy(std::size_t n, std::vector<Group> groups)
    : n_(n), groups_(std::move(groups)) {
  if (n_ == 0) throw std::invalid_argument("grouping over zero bins");
  std::size_t next = 1;
  for (const Group& g : groups_) {
    if (g.lo != next || g.hi < g.lo || g.hi > n_) {
      throw std::invalid_argument(
          "groups must be contiguous, disjoint, sorted and cover [1, n]");
    }
    next = g.hi + 1;
  }
  if (next != n_ + 1) {
    throw std::invalid_argument("groups do not cover [1, n]");
  }
  group_of_.resize(n_);
  for (std::size_t id = 0; id < groups_.size(); ++id) {
    for (std::size_t b = groups_[id].lo; b <= groups_[id].hi; ++b) {
      group_of_[b - 1] = id;
    }
  }
  for (auto it = groups_.rbegin(); it != groups_.rend(); ++it) {
    total_cost_ = it->cost + total_cost_;
  }
}

GroupingStrategy GroupingStrategy::Singletons(std::size_t n) {
  std::vector<Group> groups;
  groups.reserve(n);
  for (std::size_t i = 1; i <= n; ++i) groups.push_back(Group{i, i, 0.0});
  return GroupingStrategy(n, std::move(groups));
}

std::size_t GroupingStrategy::GroupOf(std::size_t bin) const {
  if (bin < 1 || bin > n_) throw std::out_of_range("bin out of range");
  return group_of_[bin - 1];
}

PermissibleGroups PermissibleGroups::All(std::size_t n, double v) {
  if (n == 0) throw std::invalid_argument("permissible groups over zero bins");
  PermissibleGroups out;
  out.n_ = n;
  out.complete_ = true;
  out.v_ = v;
  return out;
}

PermissibleGroups PermissibleGroups::FromList(std::size_t n,
                                              std::vector<Candidate> list) {
  if (n == 0) throw std::invalid_argument("permissible groups over zero bins");
  for (const Candidate& c : list) {
    if (c.lo < 1 || c.lo > c.hi || c.hi > n) {
      throw std::invalid_argument("candidate group out of range");
    }
  }
  std::sort(list.begin(), list.end(), [](const Candidate& a, const Candidate& b) {
    return a.lo != b.lo ? a.lo < b.lo : a.hi < b.hi;
  });
  for (std::size_t k = 1; k < list.size(); ++k) {
    if (list[k].lo == list[k - 1].lo && list[k].hi == list[k - 1].hi) {
      throw std::invalid_argument("duplicate candidate group");
    }
  }
  PermissibleGroups out;
  out.n_ = n;
  out.offsets_.assign(n + 1, 0);
  for (const Candidate& c : list) ++out.offsets_[c.lo];
  for (std::size_t i = 1; i <= n; ++i) out.offsets_[i] += out.offsets_[i - 1];
  out.list_ = std::move(list);
  for (std::size_t lo = 1; lo <= n; ++lo) {
    const std::size_t first = out.offsets_[lo - 1];
    if (first == out.offsets_[lo] || out.list_[first].hi != lo) {
      throw std::invalid_argument("singleton [" + std::to_string(lo) + ", " +
                                  std::to_string(lo) +
                                  "] missing from permissible groups");
    }
  }
  return out;
}

std::size_t PermissibleGroups::size() const {
  return complete_ ? n_ * (n_ + 1) / 2 : list_.size();
}

std::vector<Candidate> PermissibleGroups::ToList() const {
  if (!complete_) return list_;
  std::vector<Candidate> out;
  out.reserve(size());
  for (std::size_t lo = 1; lo <= n_; ++lo) {
    ForEachStartingAt(lo, [&](const Candidate& c) { out.push_back(c); });
  }
  return out;
}

}  // namespace dph
