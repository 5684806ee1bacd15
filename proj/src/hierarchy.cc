#include "dph/hierarchy.h"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace dph {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t CeilDiv(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

std::size_t Power(std::size_t base, std::size_t exponent) {
  std::size_t out = 1;
  for (std::size_t k = 0; k < exponent; ++k) out *= base;
  return out;
}

// Inverse-variance blend of a node's own measurement y with the sum s of its
// children's estimates. Nodes without information come out as (0, inf).
void Blend(double y, double var_y, double s, double var_s, double& z,
           double& var_z) {
  const bool y_inf = std::isinf(var_y);
  const bool s_inf = std::isinf(var_s);
  if (y_inf && s_inf) {
    z = 0.0;
    var_z = kInf;
  } else if (var_y == 0.0) {
    z = y;
    var_z = 0.0;
  } else if (var_s == 0.0) {
    z = s;
    var_z = 0.0;
  } else if (y_inf) {
    z = s;
    var_z = var_s;
  } else if (s_inf) {
    z = y;
    var_z = var_y;
  } else {
    const double wy = 1.0 / var_y;
    const double ws = 1.0 / var_s;
    var_z = 1.0 / (wy + ws);
    z = (y * wy + s * ws) * var_z;
  }
}

}  // namespace

std::vector<double> LevelWeights(std::size_t t, BudgetAllocation allocation) {
  if (t == 0) throw std::invalid_argument("tree height must be >= 1");
  std::vector<double> alpha(t, 1.0);
  if (allocation == BudgetAllocation::kUniform) return alpha;
  double total = 0.0;
  for (std::size_t ell = 0; ell < t; ++ell) {
    alpha[ell] = std::pow(kGeometricRatio, static_cast<double>(ell));
    total += alpha[ell];
  }
  for (double& a : alpha) a *= static_cast<double>(t) / total;
  return alpha;
}

double ScaleBudget(double eps, std::size_t t, std::size_t ell,
                   BudgetAllocation allocation) {
  if (ell < 1 || ell > t) throw std::out_of_range("level outside [1, t]");
  return LevelWeights(t, allocation)[ell - 1] * eps;
}

std::size_t TreeHeight(std::size_t n, std::size_t fanout) {
  if (n == 0) throw std::invalid_argument("tree over zero bins");
  if (fanout < 2) throw std::invalid_argument("fanout must be >= 2");
  std::size_t t = 1;
  for (std::size_t leaves = 1; leaves < n; leaves *= fanout) ++t;
  return t;
}

AggregateTree AggregateTree::Build(std::span<const double> values,
                                   std::size_t fanout) {
  const std::size_t t = TreeHeight(values.size(), fanout);
  std::vector<TreeLevel> levels(t);
  TreeLevel& leaves = levels[t - 1];
  leaves.values.assign(values.begin(), values.end());
  for (std::size_t ell = t - 1; ell >= 1; --ell) {
    const std::vector<double>& below = levels[ell].values;
    std::vector<double>& sums = levels[ell - 1].values;
    sums.assign(CeilDiv(below.size(), fanout), 0.0);
    for (std::size_t i = 0; i < below.size(); ++i) sums[i / fanout] += below[i];
  }
  for (TreeLevel& level : levels) {
    level.variances.assign(level.values.size(), 0.0);
    level.pruned.assign(level.values.size(), 0);
  }
  return AggregateTree(values.size(), fanout, std::move(levels));
}

AggregateTree::AggregateTree(std::size_t n, std::size_t fanout,
                             std::vector<TreeLevel> levels)
    : n_(n), fanout_(fanout), levels_(std::move(levels)) {
  if (levels_.size() != TreeHeight(n, fanout)) {
    throw std::invalid_argument("tree height does not match n and fanout");
  }
  for (std::size_t ell = 1; ell <= height(); ++ell) {
    const TreeLevel& level = levels_[ell - 1];
    const std::size_t size = LevelSize(ell);
    if (level.values.size() != size || level.variances.size() != size ||
        level.pruned.size() != size) {
      throw std::invalid_argument("level " + std::to_string(ell) +
                                  " has the wrong number of nodes");
    }
  }
}

std::size_t AggregateTree::Span(std::size_t ell) const {
  if (ell < 1 || ell > height()) throw std::out_of_range("level outside [1, t]");
  return Power(fanout_, height() - ell);
}

std::size_t AggregateTree::LevelSize(std::size_t ell) const {
  return CeilDiv(n_, Span(ell));
}

RangeQuery AggregateTree::LeafRange(std::size_t ell, std::size_t i) const {
  if (i >= LevelSize(ell)) throw std::out_of_range("node index past level end");
  const std::size_t span = Span(ell);
  return RangeQuery{i * span + 1, std::min((i + 1) * span, n_)};
}

TreeLevel HierarchyLevel(std::span<const double> level_values,
                         std::span<const std::uint8_t> mask, double eps_level,
                         NoiseSource& src, BudgetLedger& ledger,
                         std::string module) {
  if (level_values.size() != mask.size()) {
    throw std::invalid_argument("mask length differs from level length");
  }
  if (!(eps_level > 0.0) || !std::isfinite(eps_level)) {
    throw std::invalid_argument("level budget must be finite and > 0");
  }
  ledger.Spend(std::move(module), eps_level);
  const LaplaceScale scale = LaplaceScale::Finite(1.0 / eps_level);
  TreeLevel out;
  out.values.resize(level_values.size());
  out.variances.resize(level_values.size());
  out.pruned.resize(level_values.size());
  for (std::size_t i = 0; i < level_values.size(); ++i) {
    if (mask[i]) {
      out.values[i] = level_values[i] + SampleLaplace(src, scale);
      out.variances[i] = scale.variance();
      out.pruned[i] = 0;
    } else {
      out.values[i] = 0.0;
      out.variances[i] = kInf;
      out.pruned[i] = 1;
    }
  }
  return out;
}

HayEstimator::HayEstimator(AggregateTree noisy) : noisy_(std::move(noisy)) {
  const std::size_t t = noisy_.height();
  const std::size_t f = noisy_.fanout();
  std::vector<std::vector<double>> z(t);
  upward_variance_.resize(t);

  z[t - 1].resize(noisy_.LevelSize(t));
  upward_variance_[t - 1].resize(noisy_.LevelSize(t));
  for (std::size_t i = 0; i < noisy_.LevelSize(t); ++i) {
    const TreeLevel& leaves = noisy_.level(t);
    Blend(leaves.values[i], leaves.variances[i], 0.0, kInf, z[t - 1][i],
          upward_variance_[t - 1][i]);
  }
  for (std::size_t ell = t - 1; ell >= 1; --ell) {
    const TreeLevel& level = noisy_.level(ell);
    const std::vector<double>& child_z = z[ell];
    const std::vector<double>& child_var = upward_variance_[ell];
    z[ell - 1].resize(level.size());
    upward_variance_[ell - 1].resize(level.size());
    for (std::size_t i = 0; i < level.size(); ++i) {
      double s = 0.0;
      double var_s = 0.0;
      const std::size_t end = std::min((i + 1) * f, child_z.size());
      for (std::size_t c = i * f; c < end; ++c) {
        s += child_z[c];
        var_s += child_var[c];
      }
      Blend(level.values[i], level.variances[i], s, var_s, z[ell - 1][i],
            upward_variance_[ell - 1][i]);
    }
  }

  consistent_.resize(t);
  consistent_[0] = z[0];
  for (std::size_t ell = 1; ell < t; ++ell) {
    const std::vector<double>& parents = consistent_[ell - 1];
    const std::vector<double>& child_z = z[ell];
    const std::vector<double>& child_var = upward_variance_[ell];
    std::vector<double>& out = consistent_[ell];
    out = child_z;
    for (std::size_t i = 0; i < parents.size(); ++i) {
      const std::size_t begin = i * f;
      const std::size_t end = std::min(begin + f, child_z.size());
      double sum_z = 0.0;
      double sum_var = 0.0;
      std::size_t uninformed = 0;
      for (std::size_t c = begin; c < end; ++c) {
        if (std::isinf(child_var[c])) {
          ++uninformed;
        } else {
          sum_z += child_z[c];
          sum_var += child_var[c];
        }
      }
      const double residual = parents[i] - sum_z;
      if (uninformed > 0) {
        const double share = residual / static_cast<double>(uninformed);
        for (std::size_t c = begin; c < end; ++c) {
          if (std::isinf(child_var[c])) out[c] = share;
        }
      } else if (sum_var > 0.0) {
        for (std::size_t c = begin; c < end; ++c) {
          out[c] += residual * (child_var[c] / sum_var);
        }
      } else {
        const double share = residual / static_cast<double>(end - begin);
        for (std::size_t c = begin; c < end; ++c) out[c] += share;
      }
    }
  }
}

double HayEstimator::Answer(RangeQuery q) const {
  ValidateQuery(q, noisy_.n());
  double sum = 0.0;
  for (const TreeNodeRef& node : CanonicalCover(noisy_.n(), noisy_.fanout(), q)) {
    sum += consistent_[node.level - 1][node.index];
  }
  return sum;
}

std::vector<double> HayEstimator::Leaves() const { return consistent_.back(); }

double HayEstimate(const HayEstimator& estimator, RangeQuery q) {
  return estimator.Answer(q);
}

std::vector<TreeNodeRef> CanonicalCover(std::size_t n, std::size_t fanout,
                                        RangeQuery q) {
  ValidateQuery(q, n);
  std::size_t ell = TreeHeight(n, fanout);
  std::size_t l = q.lo - 1;  // half-open [l, r) on the current level
  std::size_t r = q.hi;
  std::vector<TreeNodeRef> cover;
  while (l < r) {
    if (ell == 1) {
      for (; l < r; ++l) cover.push_back(TreeNodeRef{ell, l});
      break;
    }
    while (l < r && l % fanout != 0) cover.push_back(TreeNodeRef{ell, l++});
    while (l < r && r % fanout != 0) cover.push_back(TreeNodeRef{ell, --r});
    l /= fanout;
    r /= fanout;
    --ell;
  }
  return cover;
}

double CanonicalCoverSum(const AggregateTree& tree, RangeQuery q) {
  double sum = 0.0;
  for (const TreeNodeRef& node : CanonicalCover(tree.n(), tree.fanout(), q)) {
    const TreeLevel& level = tree.level(node.level);
    if (std::isinf(level.variances[node.index])) {
      throw std::logic_error("canonical cover hits a node without a measurement");
    }
    sum += level.values[node.index];
  }
  return sum;
}

}  // namespace dph
