#include "dropout/tree.hpp"

#include "dropout/error.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

namespace dropout {

double TreeNode::gini() const noexcept {
  if (sample_count == 0) return 0.0;
  const double p = positive_fraction();
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

std::int32_t DecisionTree::depth() const noexcept {
  std::int32_t deepest = 0;
  for (const auto& n : nodes) deepest = std::max(deepest, n.depth);
  return deepest;
}

std::size_t DecisionTree::leaf_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

namespace {

struct Candidate {
  std::int32_t feature = -1;
  double threshold = 0.0;
  double score = 0.0;  // sum over children of (pos^2 + neg^2) / count; larger is purer
  std::int64_t left_count = 0;
  std::int64_t left_positive = 0;
};

// Exact test that the weighted child Gini is strictly below the parent Gini.
bool strictly_purer(std::int64_t n, std::int64_t pos, std::int64_t n_left, std::int64_t pos_left) {
  using Wide = __int128;
  const Wide nl = n_left, nr = n - n_left;
  const Wide pl = pos_left, ql = n_left - pos_left;
  const Wide pr = pos - pos_left, qr = nr - pr;
  const Wide p = pos, q = n - pos;
  return (pl * pl + ql * ql) * nr * n + (pr * pr + qr * qr) * nl * n > (p * p + q * q) * nl * nr;
}

class Grower {
 public:
  Grower(const FeatureMatrix& x, const LabelVector& y, const TreeGrowth& growth, Rng* rng)
      : x_(x), y_(y), growth_(growth), rng_(rng) {
    const auto p = static_cast<std::size_t>(x.cols());
    all_features_.resize(p);
    std::iota(all_features_.begin(), all_features_.end(), std::int32_t{0});
    subsample_ = growth.candidate_features && *growth.candidate_features < p;
    if (subsample_ && rng_ == nullptr)
      throw InvalidArgumentError("grow_tree: feature subsampling needs a generator");
    if (growth.candidate_features && *growth.candidate_features == 0)
      throw InvalidArgumentError("grow_tree: candidate feature count must be positive");
  }

  DecisionTree grow(std::span<const Eigen::Index> sample) {
    DecisionTree tree;
    tree.width = x_.cols();
    buffer_.assign(sample.begin(), sample.end());

    struct Work {
      std::size_t begin, end;
      std::int32_t depth;
      std::int32_t parent;
      bool is_left;
    };
    std::vector<Work> stack{{0, buffer_.size(), 0, -1, false}};
    while (!stack.empty()) {
      const Work w = stack.back();
      stack.pop_back();

      const auto id = static_cast<std::int32_t>(tree.nodes.size());
      if (w.parent >= 0) {
        auto& parent = tree.nodes[static_cast<std::size_t>(w.parent)];
        (w.is_left ? parent.left : parent.right) = id;
      }
      TreeNode node;
      node.depth = w.depth;
      node.sample_count = static_cast<std::int64_t>(w.end - w.begin);
      for (std::size_t i = w.begin; i < w.end; ++i) node.positive_count += y_(buffer_[i]);

      const auto best = find_split(w.begin, w.end, node, w.depth);
      if (!best) {
        tree.nodes.push_back(node);
        continue;
      }
      node.feature = best->feature;
      node.threshold = best->threshold;
      tree.nodes.push_back(node);

      const auto mid = std::stable_partition(
          buffer_.begin() + static_cast<std::ptrdiff_t>(w.begin),
          buffer_.begin() + static_cast<std::ptrdiff_t>(w.end),
          [&](Eigen::Index r) { return x_(r, best->feature) <= best->threshold; });
      const auto split_at = static_cast<std::size_t>(mid - buffer_.begin());
      stack.push_back({split_at, w.end, w.depth + 1, id, false});
      stack.push_back({w.begin, split_at, w.depth + 1, id, true});
    }
    return tree;
  }

 private:
  std::optional<Candidate> find_split(std::size_t begin, std::size_t end, const TreeNode& node,
                                      std::int32_t depth) {
    const std::int64_t n = node.sample_count;
    const std::int64_t pos = node.positive_count;
    if (pos == 0 || pos == n) return std::nullopt;
    if (growth_.max_depth && depth >= *growth_.max_depth) return std::nullopt;
    if (n < 2 * growth_.min_leaf) return std::nullopt;

    std::optional<Candidate> best;
    for (const auto f : candidates()) {
      values_.clear();
      for (std::size_t i = begin; i < end; ++i)
        values_.emplace_back(x_(buffer_[i], f), y_(buffer_[i]));
      std::sort(values_.begin(), values_.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });

      std::int64_t n_left = 0, pos_left = 0;
      for (std::size_t i = 0; i + 1 < values_.size(); ++i) {
        ++n_left;
        pos_left += values_[i].second;
        if (!(values_[i].first < values_[i + 1].first)) continue;
        const std::int64_t n_right = n - n_left;
        if (n_left < growth_.min_leaf || n_right < growth_.min_leaf) continue;
        const auto neg_left = n_left - pos_left;
        const auto pos_right = pos - pos_left;
        const auto neg_right = n_right - pos_right;
        const double score =
            static_cast<double>(pos_left * pos_left + neg_left * neg_left) / static_cast<double>(n_left) +
            static_cast<double>(pos_right * pos_right + neg_right * neg_right) / static_cast<double>(n_right);
        if (!best || score > best->score) {
          double threshold = 0.5 * (values_[i].first + values_[i + 1].first);
          if (!(threshold < values_[i + 1].first)) threshold = values_[i].first;
          best = Candidate{f, threshold, score, n_left, pos_left};
        }
      }
    }
    if (!best) return std::nullopt;
    if (!growth_.allow_zero_gain && !strictly_purer(n, pos, best->left_count, best->left_positive))
      return std::nullopt;
    return best;
  }

  std::span<const std::int32_t> candidates() {
    if (!subsample_) return all_features_;
    // Partial Fisher-Yates over a fresh identity permutation, then sorted.
    scratch_features_ = all_features_;
    const std::size_t m = *growth_.candidate_features;
    for (std::size_t i = 0; i < m; ++i) {
      const auto j = i + static_cast<std::size_t>(rng_->below(scratch_features_.size() - i));
      std::swap(scratch_features_[i], scratch_features_[j]);
    }
    std::sort(scratch_features_.begin(), scratch_features_.begin() + static_cast<std::ptrdiff_t>(m));
    return std::span<const std::int32_t>(scratch_features_.data(), m);
  }

  const FeatureMatrix& x_;
  const LabelVector& y_;
  const TreeGrowth& growth_;
  Rng* rng_;
  bool subsample_ = false;
  std::vector<std::int32_t> all_features_;
  std::vector<std::int32_t> scratch_features_;
  std::vector<Eigen::Index> buffer_;
  std::vector<std::pair<double, int>> values_;
};

}  // namespace

DecisionTree grow_tree(const FeatureMatrix& features, const LabelVector& labels,
                       std::span<const Eigen::Index> sample, const TreeGrowth& growth, Rng* rng) {
  Grower grower(features, labels, growth, rng);
  return grower.grow(sample);
}

}  // namespace dropout
