#include "dph/grouping.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dph {
namespace {

void CheckRange(std::size_t lo, std::size_t hi, std::size_t n) {
  if (lo < 1 || lo > hi || hi > n) {
    throw std::out_of_range("group [" + std::to_string(lo) + ", " +
                            std::to_string(hi) + "] out of range");
  }
}

using Wide = SquaredCostEngine::Wide;

Wide TwoSum(double a, double b) {
  const double s = a + b;
  const double bb = s - a;
  return {s, (a - (s - bb)) + (b - bb)};
}

Wide Renormalize(double hi, double lo) {
  const double s = hi + lo;
  return {s, lo - (s - hi)};
}

Wide Add(Wide a, Wide b) {
  const Wide s = TwoSum(a.hi, b.hi);
  const Wide t = TwoSum(a.lo, b.lo);
  const Wide u = Renormalize(s.hi, s.lo + t.hi);
  return Renormalize(u.hi, u.lo + t.lo);
}

Wide Sub(Wide a, Wide b) { return Add(a, Wide{-b.hi, -b.lo}); }

Wide Mul(Wide a, Wide b) {
  const double p = a.hi * b.hi;
  const double err = std::fma(a.hi, b.hi, -p);
  return Renormalize(p, err + (a.hi * b.lo + a.lo * b.hi));
}

Wide Div(Wide a, double d) {
  const double q1 = a.hi / d;
  const Wide r = Sub(a, Mul(Wide{q1, 0.0}, Wide{d, 0.0}));
  const double q2 = r.hi / d;
  const Wide r2 = Sub(r, Mul(Wide{q2, 0.0}, Wide{d, 0.0}));
  return Add(Wide{q1, 0.0}, Renormalize(q2, r2.hi / d));
}

// Sorted copy of the values and each value's rank in it.
void RankValues(std::span<const double> values, std::vector<double>& sorted,
                std::vector<std::size_t>& rank) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] < values[b];
  });
  sorted.resize(n);
  rank.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    sorted[r] = values[order[r]];
    rank[order[r]] = r;
  }
}

// sum |b - mean| from the count/sum of the values <= mean and the totals.
double DeviationFromSplit(double mean, std::int64_t below_count, double below_sum,
                          std::int64_t count, double sum) {
  const double lower = mean * static_cast<double>(below_count) - below_sum;
  const double upper =
      (sum - below_sum) - mean * static_cast<double>(count - below_count);
  return std::max(0.0, lower + upper);
}

}  // namespace

double AbsoluteCost(std::span<const double> values, std::size_t lo,
                    std::size_t hi, double v) {
  CheckRange(lo, hi, values.size());
  double sum = 0.0;
  for (std::size_t j = lo - 1; j < hi; ++j) sum += values[j];
  const double mean = sum / static_cast<double>(hi - lo + 1);
  double deviation = 0.0;
  for (std::size_t j = lo - 1; j < hi; ++j) deviation += std::abs(values[j] - mean);
  return deviation + v;
}

double SquaredCost(std::span<const double> prefix1,
                   std::span<const double> prefix2, std::size_t lo,
                   std::size_t hi, double v) {
  if (prefix1.size() != prefix2.size()) {
    throw std::invalid_argument("prefix vectors differ in length");
  }
  CheckRange(lo, hi, prefix1.size());
  const double s1 = prefix1[hi - 1] - (lo > 1 ? prefix1[lo - 2] : 0.0);
  const double s2 = prefix2[hi - 1] - (lo > 1 ? prefix2[lo - 2] : 0.0);
  return s2 - s1 * s1 / static_cast<double>(hi - lo + 1) + v * v;
}

double BiasCorrection(std::size_t group_size, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("bias correction needs eps > 0");
  if (group_size == 0) throw std::invalid_argument("empty group");
  return 2.0 * static_cast<double>(group_size - 1) / (eps * eps);
}

SquaredCostEngine::SquaredCostEngine(std::span<const double> values) {
  const std::size_t n = values.size();
  const double mean =
      n == 0 ? 0.0 : std::accumulate(values.begin(), values.end(), 0.0) / n;
  prefix1_.assign(n + 1, Wide{});
  prefix2_.assign(n + 1, Wide{});
  for (std::size_t j = 0; j < n; ++j) {
    const double centered = values[j] - mean;
    prefix1_[j + 1] = Add(prefix1_[j], Wide{centered, 0.0});
    prefix2_[j + 1] = Add(prefix2_[j], Mul(Wide{centered, 0.0}, Wide{centered, 0.0}));
  }
}

double SquaredCostEngine::Deviation(std::size_t lo, std::size_t hi) const {
  if (lo == hi) return 0.0;
  const Wide s1 = Sub(prefix1_[hi], prefix1_[lo - 1]);
  const Wide s2 = Sub(prefix2_[hi], prefix2_[lo - 1]);
  const Wide square_over_len = Div(Mul(s1, s1), static_cast<double>(hi - lo + 1));
  const Wide dev = Sub(s2, square_over_len);
  return std::max(0.0, dev.hi + dev.lo);
}

AbsoluteSweep::AbsoluteSweep(std::span<const double> values)
    : values_(values.begin(), values.end()),
      count_tree_(values.size() + 1, 0),
      sum_tree_(values.size() + 1, 0.0) {
  RankValues(values, sorted_, rank_);
  touched_.reserve(values.size());
}

void AbsoluteSweep::Reset(std::size_t lo) {
  CheckRange(lo, lo, values_.size());
  const std::size_t size = values_.size();
  for (std::size_t index : touched_) {
    for (std::size_t i = rank_[index] + 1; i <= size; i += i & (~i + 1)) {
      count_tree_[i] = 0;
      sum_tree_[i] = 0.0;
    }
  }
  touched_.clear();
  lo_ = lo;
  hi_ = lo - 1;
  total_ = 0.0;
}

void AbsoluteSweep::Insert(std::size_t index) {
  const std::size_t size = values_.size();
  const double value = values_[index];
  for (std::size_t i = rank_[index] + 1; i <= size; i += i & (~i + 1)) {
    ++count_tree_[i];
    sum_tree_[i] += value;
  }
  touched_.push_back(index);
  total_ += value;
}

double AbsoluteSweep::ExtendTo(std::size_t hi) {
  if (hi < hi_ || hi < lo_ || hi > values_.size()) {
    throw std::out_of_range("sweep can only grow within [lo, n]");
  }
  while (hi_ < hi) Insert(hi_++);  // values_[hi_] is bin hi_ + 1
  const auto count = static_cast<std::int64_t>(hi_ - lo_ + 1);
  const double mean = total_ / static_cast<double>(count);
  std::size_t pos = static_cast<std::size_t>(
      std::upper_bound(sorted_.begin(), sorted_.end(), mean) - sorted_.begin());
  std::int64_t below_count = 0;
  double below_sum = 0.0;
  for (; pos > 0; pos -= pos & (~pos + 1)) {
    below_count += count_tree_[pos];
    below_sum += sum_tree_[pos];
  }
  return DeviationFromSplit(mean, below_count, below_sum, count, total_);
}

RangeAbsoluteCost::RangeAbsoluteCost(std::span<const double> values)
    : size_(values.size()) {
  const std::size_t n = values.size();
  std::vector<std::size_t> rank;
  RankValues(values, sorted_, rank);
  prefix_.assign(n + 1, 0.0);
  for (std::size_t j = 0; j < n; ++j) prefix_[j + 1] = prefix_[j] + values[j];
  std::size_t depth = 1;
  while ((std::size_t{1} << (depth - 1)) < n) ++depth;
  nodes_.reserve(1 + n * (depth + 1));
  nodes_.push_back(Node{});  // shared empty node
  roots_.assign(n + 1, 0);
  for (std::size_t j = 0; j < n; ++j) {
    roots_[j + 1] = Insert(roots_[j], 0, n, rank[j], values[j]);
  }
}

std::int32_t RangeAbsoluteCost::Insert(std::int32_t prev, std::size_t l,
                                       std::size_t r, std::size_t rank,
                                       double value) {
  Node node = nodes_[prev];
  node.count += 1;
  node.sum += value;
  if (r - l > 1) {
    const std::size_t mid = l + (r - l) / 2;
    if (rank < mid) {
      node.left = Insert(node.left, l, mid, rank, value);
    } else {
      node.right = Insert(node.right, mid, r, rank, value);
    }
  }
  nodes_.push_back(node);
  return static_cast<std::int32_t>(nodes_.size() - 1);
}

double RangeAbsoluteCost::Deviation(std::size_t lo, std::size_t hi) const {
  const std::size_t n = size_;
  CheckRange(lo, hi, n);
  const auto count = static_cast<std::int64_t>(hi - lo + 1);
  const double sum = prefix_[hi] - prefix_[lo - 1];
  const double mean = sum / static_cast<double>(count);
  const std::size_t pos = static_cast<std::size_t>(
      std::upper_bound(sorted_.begin(), sorted_.end(), mean) - sorted_.begin());

  // count/sum of ranks < pos among values lo..hi
  std::int64_t below_count = 0;
  double below_sum = 0.0;
  std::int32_t a = roots_[hi];
  std::int32_t b = roots_[lo - 1];
  std::size_t l = 0;
  std::size_t r = n;
  if (pos >= n) {
    below_count = count;
    below_sum = sum;
  } else {
    while (pos > l && r - l > 1) {
      const std::size_t mid = l + (r - l) / 2;
      if (pos <= mid) {
        a = nodes_[a].left;
        b = nodes_[b].left;
        r = mid;
      } else {
        const Node& la = nodes_[nodes_[a].left];
        const Node& lb = nodes_[nodes_[b].left];
        below_count += la.count - lb.count;
        below_sum += la.sum - lb.sum;
        a = nodes_[a].right;
        b = nodes_[b].right;
        l = mid;
      }
    }
    if (pos > l) {  // reached a leaf lying wholly below pos
      below_count += nodes_[a].count - nodes_[b].count;
      below_sum += nodes_[a].sum - nodes_[b].sum;
    }
  }
  return DeviationFromSplit(mean, below_count, below_sum, count, sum);
}

PermissibleGroups DyadicCandidates(std::size_t n, double v) {
  if (n == 0) throw std::invalid_argument("dyadic candidates over zero bins");
  std::vector<Candidate> list;
  for (std::size_t len = 1; len <= n; len *= 2) {
    for (std::size_t lo = 1; lo + len - 1 <= n; ++lo) {
      list.push_back(Candidate{lo, lo + len - 1, v});
    }
  }
  return PermissibleGroups::FromList(n, std::move(list));
}

GroupingStrategy GroupAbsoluteDp(std::span<const double> values, double eps2,
                                 const PermissibleGroups& candidates,
                                 NoiseSource& src, BudgetLedger& ledger,
                                 std::string module, GroupingStats* stats) {
  if (!(eps2 >= 0.0) || !std::isfinite(eps2)) {
    throw std::invalid_argument("grouping budget must be finite and >= 0");
  }
  if (values.size() != candidates.n()) {
    throw std::invalid_argument("candidate set does not match histogram size");
  }
  if (eps2 > 0.0) ledger.Spend(std::move(module), eps2);

  auto noisy = [&](double cost, const Candidate& c) {
    if (eps2 > 0.0) {
      cost += SampleLaplace(src, 1.0 / (eps2 * static_cast<double>(c.size())));
    }
    return cost;
  };

  if (candidates.complete()) {
    AbsoluteSweep sweep(values);
    std::size_t current = 0;
    return PartitionByDp(
        candidates,
        [&](const Candidate& c) {
          if (c.lo != current) {
            sweep.Reset(c.lo);
            current = c.lo;
          }
          return noisy(sweep.ExtendTo(c.hi) + c.v, c);
        },
        stats);
  }
  RangeAbsoluteCost engine(values);
  return PartitionByDp(
      candidates,
      [&](const Candidate& c) {
        return noisy(engine.Deviation(c.lo, c.hi) + c.v, c);
      },
      stats);
}

GroupingStrategy GroupSquaredOptimal(std::span<const double> noisy_values,
                                     double noise_eps,
                                     const PermissibleGroups& candidates,
                                     bool bias_correct, GroupingStats* stats) {
  if (bias_correct && !(noise_eps > 0.0)) {
    throw std::invalid_argument(
        "bias correction requires the noise budget used on the input (> 0)");
  }
  if (noisy_values.size() != candidates.n()) {
    throw std::invalid_argument("candidate set does not match histogram size");
  }
  const SquaredCostEngine engine(noisy_values);
  return PartitionByDp(
      candidates,
      [&](const Candidate& c) {
        const double cost = engine.Deviation(c.lo, c.hi) + c.v * c.v;
        return bias_correct ? cost - BiasCorrection(c.size(), noise_eps) : cost;
      },
      stats);
}

}  // namespace dph
