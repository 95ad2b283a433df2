#pragma once

#include "dropout/rng.hpp"
#include "dropout/schema.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace dropout {

/// One node of a fitted CART tree. Leaves have `feature == -1`.
/// Counts are sample multiplicities (a bootstrap duplicate counts twice).
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;  // rows with x[feature] <= threshold go left
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::int64_t sample_count = 0;
  std::int64_t positive_count = 0;
  std::int32_t depth = 0;

  bool is_leaf() const noexcept { return feature < 0; }
  double positive_fraction() const noexcept {
    return sample_count == 0 ? 0.0
                             : static_cast<double>(positive_count) / static_cast<double>(sample_count);
  }
  /// 1 - sum_k p_k^2 over the two classes.
  double gini() const noexcept;
};

/// Nodes are stored in depth-first pre-order; index 0 is the root.
struct DecisionTree {
  std::vector<TreeNode> nodes;
  Eigen::Index width = 0;

  template <typename Derived>
  double score(const Eigen::MatrixBase<Derived>& row) const {
    std::int32_t at = 0;
    while (!nodes[static_cast<std::size_t>(at)].is_leaf()) {
      const auto& n = nodes[static_cast<std::size_t>(at)];
      at = row(n.feature) <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(at)].positive_fraction();
  }

  /// Longest root-to-leaf path, in edges.
  std::int32_t depth() const noexcept;
  std::size_t leaf_count() const noexcept;
};

struct TreeGrowth {
  std::optional<std::int32_t> max_depth;  // nullopt: grow until pure
  std::int64_t min_leaf = 1;
  /// Features examined per split; nullopt or >= width means all of them.
  std::optional<std::size_t> candidate_features;
  /// Accept the best split even when it leaves the weighted Gini unchanged
  /// (XOR-like parents). Off everywhere in the library; the default keeps
  /// every internal node strictly purifying.
  bool allow_zero_gain = false;
};

/// Greedy CART on Gini impurity.
///
/// At every node each candidate feature is sorted and every midpoint between
/// consecutive distinct values is scored; the split with the lowest weighted
/// child Gini wins, scanning features and thresholds in ascending order so
/// that ties go to the lower feature index, then the lower threshold. A node
/// becomes a leaf when it is pure, at max_depth, or when the best split does
/// not strictly lower the weighted Gini (checked in exact integer arithmetic;
/// see allow_zero_gain).
///
/// `sample` lists training rows, repeats allowed. When a candidate subset is
/// requested it is drawn from `rng` at each node and visited in ascending
/// order; `rng` is not touched otherwise and may be null.
DecisionTree grow_tree(const FeatureMatrix& features, const LabelVector& labels,
                       std::span<const Eigen::Index> sample, const TreeGrowth& growth,
                       Rng* rng = nullptr);

}  // namespace dropout
