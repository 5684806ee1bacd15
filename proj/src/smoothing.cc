#include "dph/smoothing.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace dph {

SmoothingParams SmoothingParams::Create(PermissibleGroups candidates,
                                        ErrorMetric metric, double eps1,
                                        double eps2, double eps3, bool sort,
                                        bool bias_correct) {
  for (double eps : {eps1, eps2, eps3}) {
    if (!std::isfinite(eps) || eps < 0.0) {
      throw ConfigError("smoothing budgets must be finite and >= 0");
    }
  }
  if (eps1 == 0.0 && eps2 == 0.0) {
    throw ConfigError(
        "smoothing cannot run with both the ordering and grouping budgets at "
        "zero");
  }
  return SmoothingParams(std::move(candidates), metric, eps1, eps2, eps3, sort,
                         bias_correct);
}

NoisyHistogram Ordering(const Histogram& h, double eps1, bool sort,
                        NoiseSource& src, BudgetLedger& ledger) {
  if (!std::isfinite(eps1) || eps1 < 0.0) {
    throw std::invalid_argument("ordering budget must be finite and >= 0");
  }
  std::vector<NoisyBin> bins;
  bins.reserve(h.size());
  if (eps1 == 0.0) {
    for (const Bin& bin : h.bins()) bins.push_back(NoisyBin{bin.label, bin.value});
    return NoisyHistogram(std::move(bins));
  }
  ledger.Spend("smoothing/ordering", eps1);
  const LaplaceScale scale = LaplaceScale::Finite(1.0 / eps1);
  for (const Bin& bin : h.bins()) {
    bins.push_back(NoisyBin{bin.label, bin.value + SampleLaplace(src, scale)});
  }
  if (sort) {
    std::stable_sort(bins.begin(), bins.end(),
                     [](const NoisyBin& a, const NoisyBin& b) {
                       return *a.value > *b.value;
                     });
  }
  return NoisyHistogram(std::move(bins));
}

NoisyHistogram SmoothingModule(const Histogram& h, const SmoothingParams& params,
                               NoiseSource& src, BudgetLedger& ledger) {
  const std::size_t n = h.size();
  if (params.candidates().n() != n) {
    throw std::invalid_argument("permissible groups do not match histogram size");
  }
  NoiseSource ordering_src = src.Derive("ordering");
  NoiseSource grouping_src = src.Derive("grouping");
  NoiseSource noise_src = src.Derive("noise-addition");

  const NoisyHistogram ordered =
      Ordering(h, params.eps1(), params.sort(), ordering_src, ledger);
  std::vector<double> input = ordered.values();

  GroupingStrategy grouping = GroupingStrategy::Singletons(n);
  if (params.metric() == ErrorMetric::kAbsolute) {
    grouping = GroupAbsoluteDp(input, params.eps2(), params.candidates(),
                               grouping_src, ledger, "smoothing/grouping");
  } else {
    // Squared costs are computed on noisy bins: the ordering noise when it is
    // active, plus Lap(1/eps2) when the grouping has a budget of its own.
    double noise_variance =
        params.eps1() > 0.0 ? 2.0 / (params.eps1() * params.eps1()) : 0.0;
    if (params.eps2() > 0.0) {
      ledger.Spend("smoothing/grouping", params.eps2());
      const LaplaceScale scale = LaplaceScale::Finite(1.0 / params.eps2());
      for (double& x : input) x += SampleLaplace(grouping_src, scale);
      noise_variance += 2.0 / (params.eps2() * params.eps2());
    }
    grouping = GroupSquaredOptimal(input, std::sqrt(2.0 / noise_variance),
                                   params.candidates(), params.bias_correct());
  }

  // Position k of `ordered` belongs to group GroupOf(k + 1); map it back to
  // the original bin through its label.
  std::vector<std::size_t> group_of(n);
  const bool permuted = params.eps1() > 0.0 && params.sort();
  if (permuted) {
    std::unordered_map<std::string, std::size_t> index_of;
    index_of.reserve(n);
    for (std::size_t i = 0; i < n; ++i) index_of.emplace(h[i].label.name, i);
    for (std::size_t k = 0; k < n; ++k) {
      group_of[index_of.at(ordered[k].label.name)] = grouping.GroupOf(k + 1);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) group_of[i] = grouping.GroupOf(i + 1);
  }

  std::vector<std::optional<double>> published(grouping.size());
  if (params.eps3() > 0.0) {
    ledger.Spend("smoothing/noise-addition", params.eps3());
    std::vector<double> sums(grouping.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) sums[group_of[i]] += h[i].value;
    for (std::size_t g = 0; g < grouping.size(); ++g) {
      const double size = static_cast<double>(grouping[g].size());
      published[g] = sums[g] / size +
                     SampleLaplace(noise_src, 1.0 / (params.eps3() * size));
    }
  }

  std::vector<NoisyBin> bins;
  bins.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Label label = h[i].label;
    label.group = group_of[i];
    bins.push_back(NoisyBin{std::move(label), published[group_of[i]]});
  }
  return NoisyHistogram(std::move(bins));
}

GroupingStrategy GroupingFromLabels(const NoisyHistogram& h) {
  std::vector<Group> groups;
  std::unordered_set<std::size_t> closed;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const auto& id = h[i].label.group;
    if (!id) throw std::invalid_argument("bin without a group id");
    if (i > 0 && h[i - 1].label.group == id) {
      groups.back().hi = i + 1;
      continue;
    }
    if (!closed.insert(*id).second) {
      throw std::invalid_argument("group " + std::to_string(*id) +
                                  " is not contiguous in bin order");
    }
    groups.push_back(Group{i + 1, i + 1, 0.0});
  }
  return GroupingStrategy(h.size(), std::move(groups));
}

}  // namespace dph
