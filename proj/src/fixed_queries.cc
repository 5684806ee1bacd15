#include "dph/fixed_queries.h"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dph {
namespace {

constexpr std::size_t kMaxBands = 5;
constexpr double kLattice[] = {1.0, 2.0, 4.0};

// Weight mass of q inside cells [first, last].
double BlockWeight(const CellQuery& q, std::size_t first, std::size_t last) {
  const std::size_t a = std::max(first, q.lo);
  const std::size_t e = std::min(last, q.hi);
  if (a > e) return 0.0;
  if (q.lo == q.hi) return q.first_weight;
  double sum = static_cast<double>(e - a + 1);
  if (a == q.lo) sum += q.first_weight - 1.0;
  if (e == q.hi) sum += q.last_weight - 1.0;
  return sum;
}

// P_k(q): sum over the level-k nodes of (weight mass of q below the node)^2.
double SquaredNodeMass(const CellQuery& q, double span_d, std::size_t span) {
  const std::size_t first_block = (q.lo - 1) / span;
  const std::size_t last_block = (q.hi - 1) / span;
  const double a = BlockWeight(q, first_block * span + 1, (first_block + 1) * span);
  if (first_block == last_block) return a * a;
  const double b = BlockWeight(q, last_block * span + 1, (last_block + 1) * span);
  const double full = static_cast<double>(last_block - first_block - 1);
  return a * a + b * b + full * span_d * span_d;
}

// T_d = sum over queries of the weight products of cell pairs whose lowest
// common ancestor sits at level d (d = 1..t, index d - 1).
std::vector<double> AncestorPairMass(const Workload& workload, std::size_t fanout,
                                     std::size_t t) {
  std::vector<std::size_t> span(t);
  span[t - 1] = 1;
  for (std::size_t k = t - 1; k >= 1; --k) span[k - 1] = span[k] * fanout;
  std::vector<double> mass(t, 0.0);
  std::vector<double> p(t + 1, 0.0);
  for (const CellQuery& q : workload.queries()) {
    for (std::size_t k = 0; k < t; ++k) {
      p[k] = SquaredNodeMass(q, static_cast<double>(span[k]), span[k]);
    }
    p[t] = 0.0;
    for (std::size_t k = 0; k < t; ++k) mass[k] += p[k] - p[k + 1];
  }
  return mass;
}

double IdentityError(const Workload& workload) {
  double total = 0.0;
  for (const CellQuery& q : workload.queries()) {
    if (q.lo == q.hi) {
      total += q.first_weight * q.first_weight;
    } else {
      total += q.first_weight * q.first_weight + q.last_weight * q.last_weight +
               static_cast<double>(q.hi - q.lo - 1);
    }
  }
  return 2.0 * total;
}

double HierarchicalError(std::span<const double> weights, std::size_t fanout,
                         std::span<const double> pair_mass) {
  const double sensitivity = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<double> variance(weights.size());
  for (std::size_t k = 0; k < weights.size(); ++k) {
    const double lambda = sensitivity / weights[k];
    variance[k] = 2.0 * lambda * lambda;
  }
  const std::vector<double> cov = LeafCovarianceByAncestor(fanout, variance);
  double total = 0.0;
  for (std::size_t d = 0; d < cov.size(); ++d) total += cov[d] * pair_mass[d];
  return total;
}

void CheckFanout(std::size_t fanout) {
  if (fanout < 2) throw std::invalid_argument("fanout must be >= 2");
}

}  // namespace

double CellQuery::WeightAt(std::size_t i) const {
  if (i < lo || i > hi) return 0.0;
  if (i == lo) return first_weight;
  if (i == hi) return last_weight;
  return 1.0;
}

double Evaluate(const CellQuery& q, std::span<const double> cells) {
  if (q.lo < 1 || q.lo > q.hi || q.hi > cells.size()) {
    throw std::out_of_range("cell query out of range");
  }
  if (q.lo == q.hi) return q.first_weight * cells[q.lo - 1];
  double sum = q.first_weight * cells[q.lo - 1] + q.last_weight * cells[q.hi - 1];
  for (std::size_t i = q.lo; i < q.hi - 1; ++i) sum += cells[i];
  return sum;
}

Workload::Workload(std::size_t m, std::vector<CellQuery> queries)
    : m_(m), queries_(std::move(queries)) {
  if (m_ == 0) throw std::invalid_argument("workload over zero cells");
  for (const CellQuery& q : queries_) {
    if (q.lo < 1 || q.lo > q.hi || q.hi > m_) {
      throw std::out_of_range("cell query [" + std::to_string(q.lo) + ", " +
                              std::to_string(q.hi) + "] outside [1, " +
                              std::to_string(m_) + "]");
    }
    if (!std::isfinite(q.first_weight) || !std::isfinite(q.last_weight)) {
      throw std::invalid_argument("cell query weights must be finite");
    }
  }
}

Workload Workload::FromRanges(std::size_t m, std::span<const RangeQuery> ranges) {
  std::vector<CellQuery> queries;
  queries.reserve(ranges.size());
  for (const RangeQuery& r : ranges) queries.push_back(CellQuery{r.lo, r.hi, 1.0, 1.0});
  return Workload(m, std::move(queries));
}

Workload Workload::Prefixes(std::size_t m) {
  std::vector<CellQuery> queries;
  queries.reserve(m);
  for (std::size_t hi = 1; hi <= m; ++hi) queries.push_back(CellQuery{1, hi, 1.0, 1.0});
  return Workload(m, std::move(queries));
}

Workload Workload::AllRanges(std::size_t m) {
  std::vector<CellQuery> queries;
  queries.reserve(m * (m + 1) / 2);
  for (std::size_t lo = 1; lo <= m; ++lo) {
    for (std::size_t hi = lo; hi <= m; ++hi) {
      queries.push_back(CellQuery{lo, hi, 1.0, 1.0});
    }
  }
  return Workload(m, std::move(queries));
}

Workload TransformWorkload(std::span<const RangeQuery> ranges,
                           const GroupingStrategy& grouping) {
  std::vector<CellQuery> queries;
  queries.reserve(ranges.size());
  for (const RangeQuery& r : ranges) {
    ValidateQuery(r, grouping.n());
    const std::size_t first = grouping.GroupOf(r.lo);
    const std::size_t last = grouping.GroupOf(r.hi);
    const Group& gf = grouping[first];
    const Group& gl = grouping[last];
    CellQuery q{first + 1, last + 1, 1.0, 1.0};
    if (first == last) {
      q.first_weight = q.last_weight = static_cast<double>(r.size()) /
                                       static_cast<double>(gf.size());
    } else {
      q.first_weight = static_cast<double>(gf.hi - r.lo + 1) /
                       static_cast<double>(gf.size());
      q.last_weight = static_cast<double>(r.hi - gl.lo + 1) /
                      static_cast<double>(gl.size());
    }
    queries.push_back(q);
  }
  return Workload(grouping.size(), std::move(queries));
}

double FqPlan::sensitivity() const {
  if (identity()) return 1.0;
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

std::vector<double> LeafCovarianceByAncestor(std::size_t fanout,
                                             std::span<const double> level_variance) {
  CheckFanout(fanout);
  const std::size_t t = level_variance.size();
  if (t == 0) throw std::invalid_argument("tree needs at least one level");
  for (double v : level_variance) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("level variances must be finite and > 0");
    }
  }
  const double f = static_cast<double>(fanout);

  // Solving the tree with a single leaf measurement y_0 = sigma_leaf^2 yields
  // column 0 of the estimator covariance. Everything off the path from leaf 0
  // to the root is symmetric, so one value per level suffices.
  std::vector<double> var(t);  // upward-pass variance, same for every node of a level
  std::vector<double> z(t);    // upward-pass estimate on the path
  var[t - 1] = level_variance[t - 1];
  z[t - 1] = level_variance[t - 1];
  for (std::size_t k = t - 1; k >= 1; --k) {
    const double var_children = f * var[k];
    var[k - 1] = 1.0 / (1.0 / level_variance[k - 1] + 1.0 / var_children);
    z[k - 1] = var[k - 1] * (z[k] / var_children);
  }

  std::vector<double> cov(t);
  double x = z[0];
  double below = std::pow(f, static_cast<double>(t - 1));  // leaves under a path node
  for (std::size_t k = 0; k + 1 < t; ++k) {
    const double residual = x - z[k + 1];
    // An off-path child receives residual / f, spread evenly over its leaves.
    cov[k] = residual / below;
    x = z[k + 1] + residual / f;
    below /= f;
  }
  cov[t - 1] = x;
  return cov;
}

double ExpectedWorkloadError(const Workload& workload, const FqPlan& plan) {
  if (plan.identity()) return IdentityError(workload);
  CheckFanout(plan.fanout);
  const std::size_t t = TreeHeight(workload.m(), plan.fanout);
  if (plan.weights.size() != t) {
    throw std::invalid_argument("plan has " + std::to_string(plan.weights.size()) +
                                " level weights, tree has " + std::to_string(t) +
                                " levels");
  }
  return HierarchicalError(plan.weights, plan.fanout,
                           AncestorPairMass(workload, plan.fanout, t));
}

FqPlan ChooseStrategy(const Workload& workload, const FqOptions& options) {
  if (workload.size() == 0) throw std::invalid_argument("empty workload");
  FqPlan identity{{}, options.fanout, IdentityError(workload)};
  if (options.strategy == FqStrategy::kIdentity) return identity;
  CheckFanout(options.fanout);

  const std::size_t t = TreeHeight(workload.m(), options.fanout);
  const std::vector<double> pair_mass = AncestorPairMass(workload, options.fanout, t);
  const std::size_t bands = std::min(t, kMaxBands);
  std::size_t combinations = 1;
  for (std::size_t b = 0; b < bands; ++b) combinations *= std::size(kLattice);

  FqPlan best{{}, options.fanout, 0.0};
  std::vector<double> weights(t);
  for (std::size_t code = 0; code < combinations; ++code) {
    std::vector<double> band_weight(bands);
    std::size_t rest = code;
    for (std::size_t b = bands; b-- > 0;) {
      band_weight[b] = kLattice[rest % std::size(kLattice)];
      rest /= std::size(kLattice);
    }
    for (std::size_t k = 0; k < t; ++k) weights[k] = band_weight[k * bands / t];
    const double error = HierarchicalError(weights, options.fanout, pair_mass);
    if (best.weights.empty() || error < best.expected_error) {
      best.weights = weights;
      best.expected_error = error;
    }
  }
  return identity.expected_error < best.expected_error ? identity : best;
}

std::vector<double> MeasureAndRecover(std::span<const double> cells,
                                      const FqPlan& plan, double eps,
                                      NoiseSource& src) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw std::invalid_argument("fixed-queries budget must be finite and > 0");
  }
  std::vector<double> out(cells.begin(), cells.end());
  if (plan.identity()) {
    const LaplaceScale scale = LaplaceScale::Finite(1.0 / eps);
    for (double& x : out) x += SampleLaplace(src, scale);
    return out;
  }
  AggregateTree tree = AggregateTree::Build(cells, plan.fanout);
  if (tree.height() != plan.weights.size()) {
    throw std::invalid_argument("plan does not match the tree height");
  }
  const double sensitivity = plan.sensitivity();
  for (std::size_t ell = 1; ell <= tree.height(); ++ell) {
    NoiseSource level_src = src.Derive(static_cast<std::uint64_t>(ell));
    const LaplaceScale scale =
        LaplaceScale::Finite(sensitivity / (eps * plan.weights[ell - 1]));
    TreeLevel& level = tree.mutable_level(ell);
    for (std::size_t i = 0; i < level.size(); ++i) {
      level.values[i] += SampleLaplace(level_src, scale);
      level.variances[i] = scale.variance();
    }
  }
  return HayEstimator(std::move(tree)).Leaves();
}

NoisyHistogram FixedQueries(const Histogram& cells, const Workload& workload,
                            double eps, NoiseSource& src, BudgetLedger& ledger,
                            const FqOptions& options, std::string module,
                            FqReport* report) {
  if (workload.size() == 0) throw std::invalid_argument("empty workload");
  if (workload.m() != cells.size()) {
    throw std::invalid_argument("workload is over " + std::to_string(workload.m()) +
                                " cells, input has " + std::to_string(cells.size()));
  }
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw std::invalid_argument("fixed-queries budget must be finite and > 0");
  }
  FqPlan plan = ChooseStrategy(workload, options);
  ledger.Spend(std::move(module), eps);
  const std::vector<double> estimates =
      MeasureAndRecover(cells.values(), plan, eps, src);
  std::vector<NoisyBin> bins;
  bins.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    bins.push_back(NoisyBin{cells[i].label, estimates[i]});
  }
  if (report != nullptr) report->plan = std::move(plan);
  return NoisyHistogram(std::move(bins));
}

}  // namespace dph
