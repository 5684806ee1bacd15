#include "dph/schemes.h"

#include <cmath>
#include <stdexcept>
#include <string>

#include "dph/smoothing.h"

namespace dph {
namespace {

template <typename Enum, std::size_t N>
Enum ParseName(std::string_view name, const std::pair<Enum, std::string_view> (&table)[N],
               std::string_view what) {
  for (const auto& [value, text] : table) {
    if (text == name) return value;
  }
  throw std::invalid_argument("unknown " + std::string(what) + " '" +
                              std::string(name) + "'");
}

template <typename Enum, std::size_t N>
std::string_view NameOf(Enum value, const std::pair<Enum, std::string_view> (&table)[N]) {
  for (const auto& [v, text] : table) {
    if (v == value) return text;
  }
  throw std::logic_error("enum value without a name");
}

constexpr std::pair<SchemeKind, std::string_view> kSchemeNames[] = {
    {SchemeKind::kLpa, "lpa"},        {SchemeKind::kH, "h"},
    {SchemeKind::kS1, "s1"},          {SchemeKind::kSApprox, "s-approx"},
    {SchemeKind::kS2, "s2"},          {SchemeKind::kSo, "so"},
    {SchemeKind::kDawaLike, "dawa"},  {SchemeKind::kSub, "sub"},
    {SchemeKind::kSps, "sps"}};

constexpr std::pair<ErrorMetric, std::string_view> kMetricNames[] = {
    {ErrorMetric::kAbsolute, "absolute"}, {ErrorMetric::kSquared, "squared"}};

constexpr std::pair<BudgetAllocation, std::string_view> kAllocationNames[] = {
    {BudgetAllocation::kGeometric, "geometric"},
    {BudgetAllocation::kUniform, "uniform"}};

constexpr std::pair<FqStrategy, std::string_view> kFqNames[] = {
    {FqStrategy::kIdentity, "identity"}, {FqStrategy::kHierarchical, "hierarchical"}};

std::string LevelModule(std::string_view prefix, std::size_t ell) {
  return std::string(prefix) + "/level-" + std::to_string(ell);
}

HayEstimator RunHierarchical(const Histogram& h, const SchemeConfig& config,
                             NoiseSource& src, BudgetLedger& ledger) {
  AggregateTree tree = AggregateTree::Build(h.values(), config.fanout);
  const std::size_t t = tree.height();
  const std::vector<double> alpha = LevelWeights(t, config.allocation);
  for (std::size_t ell = 1; ell <= t; ++ell) {
    const double eps_level = alpha[ell - 1] * (config.eps / static_cast<double>(t));
    const std::vector<std::uint8_t> mask(tree.LevelSize(ell), 1);
    NoiseSource level_src = src.Derive(static_cast<std::uint64_t>(ell));
    tree.mutable_level(ell) =
        HierarchyLevel(tree.level(ell).values, mask, eps_level, level_src, ledger,
                       LevelModule("hierarchy", ell));
  }
  return HayEstimator(std::move(tree));
}

// Runs Smoothing and returns the published histogram.
NoisyHistogram RunSmoothing(const Histogram& h, SchemeKind kind, double eps,
                            ErrorMetric metric, NoiseSource& src,
                            BudgetLedger& ledger) {
  const std::size_t n = h.size();
  double eps1 = 0.0;
  double eps2 = eps / 4.0;
  double eps3 = 3.0 * eps / 4.0;
  bool sort = true;
  if (kind == SchemeKind::kS2 || kind == SchemeKind::kSo) {
    eps1 = eps / 2.0;
    eps2 = 0.0;
    eps3 = eps / 2.0;
    sort = kind == SchemeKind::kSo;
  }
  const double v = 1.0 / eps3;
  PermissibleGroups candidates = kind == SchemeKind::kSApprox
                                     ? DyadicCandidates(n, v)
                                     : PermissibleGroups::All(n, v);
  const SmoothingParams params = SmoothingParams::Create(
      std::move(candidates), metric, eps1, eps2, eps3, sort);
  NoiseSource module_src = src.Derive("smoothing");
  return SmoothingModule(h, params, module_src, ledger);
}

// Grouping with (0, eps/4, 0) and v = 4 / (3 eps), shared by DAWA_LIKE and SPS.
GroupingStrategy WorkloadGrouping(const Histogram& h, double eps, ErrorMetric metric,
                                  NoiseSource& src, BudgetLedger& ledger) {
  const SmoothingParams params =
      SmoothingParams::Create(PermissibleGroups::All(h.size(), 4.0 / (3.0 * eps)),
                              metric, 0.0, eps / 4.0, 0.0, /*sort=*/false);
  NoiseSource module_src = src.Derive("smoothing");
  return GroupingFromLabels(SmoothingModule(h, params, module_src, ledger));
}

Histogram GroupTotals(const Histogram& h, const GroupingStrategy& grouping) {
  std::vector<double> totals(grouping.size(), 0.0);
  for (std::size_t g = 0; g < grouping.size(); ++g) {
    for (std::size_t j = grouping[g].lo; j <= grouping[g].hi; ++j) {
      totals[g] += h[j - 1].value;
    }
  }
  return Histogram::FromValues(totals);
}

// Spreads each cell estimate evenly over the bins of its group.
NoisyHistogram ExpandCells(const Histogram& h, const GroupingStrategy& grouping,
                           const NoisyHistogram& cells) {
  std::vector<NoisyBin> bins;
  bins.reserve(h.size());
  for (std::size_t g = 0; g < grouping.size(); ++g) {
    const double share = *cells[g].value / static_cast<double>(grouping[g].size());
    for (std::size_t j = grouping[g].lo; j <= grouping[g].hi; ++j) {
      Label label = h[j - 1].label;
      label.group = g;
      bins.push_back(NoisyBin{std::move(label), share});
    }
  }
  return NoisyHistogram(std::move(bins));
}

NoisyHistogram RunFixedQueries(const Histogram& h, const GroupingStrategy& grouping,
                               std::span<const RangeQuery> ranges,
                               const SchemeConfig& config, NoiseSource& src,
                               BudgetLedger& ledger) {
  const Workload workload = TransformWorkload(ranges, grouping);
  NoiseSource module_src = src.Derive("fixed-queries");
  const NoisyHistogram cells =
      FixedQueries(GroupTotals(h, grouping), workload, 3.0 * config.eps / 4.0,
                   module_src, ledger, FqOptions{config.fq_strategy, config.fanout});
  return ExpandCells(h, grouping, cells);
}

}  // namespace

std::string_view SchemeName(SchemeKind kind) { return NameOf(kind, kSchemeNames); }
SchemeKind ParseScheme(std::string_view name) {
  return ParseName(name, kSchemeNames, "scheme");
}
std::string_view MetricName(ErrorMetric metric) { return NameOf(metric, kMetricNames); }
ErrorMetric ParseMetric(std::string_view name) {
  return ParseName(name, kMetricNames, "metric");
}
std::string_view AllocationName(BudgetAllocation allocation) {
  return NameOf(allocation, kAllocationNames);
}
BudgetAllocation ParseAllocation(std::string_view name) {
  return ParseName(name, kAllocationNames, "budget allocation");
}
std::string_view FqStrategyName(FqStrategy strategy) {
  return NameOf(strategy, kFqNames);
}
FqStrategy ParseFqStrategy(std::string_view name) {
  return ParseName(name, kFqNames, "fixed-queries strategy");
}

ErrorMetric DefaultMetric(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::kS2:
    case SchemeKind::kSo:
    case SchemeKind::kSub:
      return ErrorMetric::kSquared;
    default:
      return ErrorMetric::kAbsolute;
  }
}

NoisyStructure::NoisyStructure(SchemeKind kind, Payload payload, BudgetLedger ledger,
                               std::optional<GroupingStrategy> grouping,
                               std::uint64_t seed)
    : kind_(kind),
      payload_(std::move(payload)),
      ledger_(std::move(ledger)),
      grouping_(std::move(grouping)),
      seed_(seed) {}

std::size_t NoisyStructure::n() const {
  if (const auto* h = std::get_if<NoisyHistogram>(&payload_)) return h->size();
  if (const auto* t = std::get_if<HayEstimator>(&payload_)) return t->n();
  return std::get<std::vector<double>>(payload_).size();
}

std::string_view NoisyStructure::variant_name() const {
  switch (payload_.index()) {
    case 0:
      return "histogram";
    case 1:
      return "tree";
    default:
      return "prefix";
  }
}

double NoisyStructure::Answer(RangeQuery q) const {
  if (const auto* h = std::get_if<NoisyHistogram>(&payload_)) return RangeSum(*h, q);
  if (const auto* t = std::get_if<HayEstimator>(&payload_)) return t->Answer(q);
  const auto& s = std::get<std::vector<double>>(payload_);
  ValidateQuery(q, s.size());
  return s[q.hi - 1] - (q.lo > 1 ? s[q.lo - 2] : 0.0);
}

PermissibleGroups SubtreeCandidates(std::size_t n, std::size_t fanout, double v) {
  const std::size_t t = TreeHeight(n, fanout);
  std::vector<Candidate> list;
  std::size_t span = 1;
  for (std::size_t level = t; level >= 1; --level, span *= fanout) {
    for (std::size_t hi = span; hi <= n; hi += span) {
      list.push_back(Candidate{hi - span + 1, hi, v});
    }
  }
  return PermissibleGroups::FromList(n, std::move(list));
}

AggregateTree SubtreeTree(const Histogram& h, const GroupingStrategy& grouping,
                          double eps_tree, std::size_t fanout,
                          BudgetAllocation allocation, NoiseSource& src,
                          BudgetLedger& ledger) {
  if (grouping.n() != h.size()) {
    throw std::invalid_argument("grouping does not match histogram size");
  }
  if (!(eps_tree > 0.0) || !std::isfinite(eps_tree)) {
    throw std::invalid_argument("tree budget must be finite and > 0");
  }
  const AggregateTree exact = AggregateTree::Build(h.values(), fanout);
  const std::size_t t = exact.height();

  struct Root {
    std::size_t level;
    std::size_t index;
  };
  std::vector<Root> roots;
  std::vector<std::vector<std::uint8_t>> masks(t);
  for (std::size_t ell = 1; ell <= t; ++ell) masks[ell - 1].assign(exact.LevelSize(ell), 1);
  for (const Group& g : grouping.groups()) {
    std::size_t level = t;
    while (level > 1 && exact.Span(level) < g.size()) --level;
    const std::size_t span = exact.Span(level);
    if (span != g.size() || (g.lo - 1) % span != 0) {
      throw std::invalid_argument("group [" + std::to_string(g.lo) + ", " +
                                  std::to_string(g.hi) +
                                  "] is not the leaf span of a full subtree");
    }
    if (level == t) continue;
    const Root root{level, (g.lo - 1) / span};
    roots.push_back(root);
    std::size_t width = 1;
    for (std::size_t k = level + 1; k <= t; ++k) {
      width *= fanout;
      for (std::size_t i = root.index * width; i < (root.index + 1) * width; ++i) {
        masks[k - 1][i] = 0;
      }
    }
  }

  const std::vector<double> alpha = LevelWeights(t, allocation);
  std::vector<double> eps_level(t);
  std::vector<TreeLevel> levels(t);
  for (std::size_t ell = 1; ell <= t; ++ell) {
    eps_level[ell - 1] = alpha[ell - 1] * (eps_tree / static_cast<double>(t));
    NoiseSource level_src = src.Derive(static_cast<std::uint64_t>(ell));
    levels[ell - 1] = HierarchyLevel(exact.level(ell).values, masks[ell - 1],
                                     eps_level[ell - 1], level_src, ledger,
                                     LevelModule("sub", ell));
  }

  // Each pruned level of a subtree funds one measurement of the subtree total
  // (the pruned nodes of a level are disjoint from its measured nodes).
  NoiseSource sums_src = src.Derive("subtree-sums");
  for (const Root& root : roots) {
    const double total = exact.level(root.level).values[root.index];
    TreeLevel& top = levels[root.level - 1];
    double sum = top.values[root.index];
    double variance = top.variances[root.index];
    for (std::size_t k = root.level + 1; k <= t; ++k) {
      const LaplaceScale scale = LaplaceScale::Finite(1.0 / eps_level[k - 1]);
      sum += total + SampleLaplace(sums_src, scale);
      variance += scale.variance();
    }
    const double count = static_cast<double>(t - root.level + 1);
    top.values[root.index] = sum / count;
    top.variances[root.index] = variance / (count * count);

    std::size_t width = 1;
    for (std::size_t k = root.level + 1; k <= t; ++k) {
      width *= fanout;
      const double share = top.values[root.index] / static_cast<double>(width);
      for (std::size_t i = root.index * width; i < (root.index + 1) * width; ++i) {
        levels[k - 1].values[i] = share;
      }
    }
  }
  return AggregateTree(h.size(), fanout, std::move(levels));
}

HayEstimator SubtreeSmooth(const Histogram& h, double eps, std::size_t fanout,
                           ErrorMetric metric, BudgetAllocation allocation,
                           NoiseSource& src, BudgetLedger& ledger,
                           GroupingStrategy* grouping_out) {
  const std::size_t n = h.size();
  const double t = static_cast<double>(TreeHeight(n, fanout));
  const SmoothingParams params = SmoothingParams::Create(
      SubtreeCandidates(n, fanout, 4.0 * t / (3.0 * eps)), metric, 0.0, eps / 4.0,
      0.0, /*sort=*/false);
  NoiseSource smoothing_src = src.Derive("smoothing");
  const GroupingStrategy grouping =
      GroupingFromLabels(SmoothingModule(h, params, smoothing_src, ledger));
  NoiseSource tree_src = src.Derive("tree");
  AggregateTree tree = SubtreeTree(h, grouping, 3.0 * eps / 4.0, fanout, allocation,
                                   tree_src, ledger);
  if (grouping_out != nullptr) *grouping_out = grouping;
  return HayEstimator(std::move(tree));
}

NoisyStructure RunScheme(const Histogram& h, const SchemeConfig& config) {
  if (!(config.eps > 0.0) || !std::isfinite(config.eps)) {
    throw ConfigError("eps must be finite and > 0");
  }
  if (config.fanout < 2) throw ConfigError("fanout must be >= 2");
  const std::size_t n = h.size();
  if (config.kind == SchemeKind::kDawaLike && n > kDawaGuard && !config.force) {
    throw GuardError("dawa refuses histograms above " + std::to_string(kDawaGuard) +
                     " bins (" + std::to_string(n) + " given); pass --force to run");
  }
  const ErrorMetric metric = config.metric.value_or(DefaultMetric(config.kind));
  BudgetLedger ledger(config.eps);
  NoiseSource src = NoiseSource(config.seed).Derive(SchemeName(config.kind));

  std::optional<GroupingStrategy> grouping;
  NoisyStructure::Payload payload;
  switch (config.kind) {
    case SchemeKind::kLpa:
      payload = Lpa(h, config.eps, src, ledger);
      break;
    case SchemeKind::kH:
      payload = RunHierarchical(h, config, src, ledger);
      break;
    case SchemeKind::kS1:
    case SchemeKind::kSApprox:
    case SchemeKind::kS2:
    case SchemeKind::kSo: {
      NoisyHistogram out = RunSmoothing(h, config.kind, config.eps, metric, src, ledger);
      if (config.kind != SchemeKind::kSo) grouping = GroupingFromLabels(out);
      payload = std::move(out);
      break;
    }
    case SchemeKind::kDawaLike: {
      grouping = WorkloadGrouping(h, config.eps, metric, src, ledger);
      std::vector<RangeQuery> ranges;
      ranges.reserve(n * (n + 1) / 2);
      for (std::size_t lo = 1; lo <= n; ++lo) {
        for (std::size_t hi = lo; hi <= n; ++hi) ranges.push_back(RangeQuery{lo, hi});
      }
      payload = RunFixedQueries(h, *grouping, ranges, config, src, ledger);
      break;
    }
    case SchemeKind::kSps: {
      grouping = WorkloadGrouping(h, config.eps, metric, src, ledger);
      std::vector<RangeQuery> prefixes;
      prefixes.reserve(n);
      for (std::size_t hi = 1; hi <= n; ++hi) prefixes.push_back(RangeQuery{1, hi});
      const NoisyHistogram bins =
          RunFixedQueries(h, *grouping, prefixes, config, src, ledger);
      payload = PrefixSums(bins.values());
      break;
    }
    case SchemeKind::kSub: {
      GroupingStrategy chosen = GroupingStrategy::Singletons(n);
      payload = SubtreeSmooth(h, config.eps, config.fanout, metric, config.allocation,
                              src, ledger, &chosen);
      grouping = std::move(chosen);
      break;
    }
  }
  ledger.Finalize();
  return NoisyStructure(config.kind, std::move(payload), std::move(ledger),
                        std::move(grouping), config.seed);
}

}  // namespace dph
