#pragma once

#include "dropout/classifiers.hpp"
#include "dropout/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace dropout {

/// ROC points, one per distinct score plus the (0, 0) origin.
/// thresholds[0] is +inf; thresholds[i] is the score at which point i is
/// reached (rows with score >= threshold are called positive).
struct RocCurve {
  std::vector<double> fpr;
  std::vector<double> tpr;
  std::vector<double> thresholds;

  std::size_t size() const noexcept { return fpr.size(); }
};

namespace detail {

template <typename ScoreDerived, typename LabelDerived>
std::pair<std::size_t, std::size_t> check_binary(const Eigen::DenseBase<ScoreDerived>& scores,
                                                 const Eigen::DenseBase<LabelDerived>& labels) {
  if (scores.size() != labels.size())
    throw LengthMismatchError("scores and labels differ in length (" + std::to_string(scores.size()) +
                              " vs " + std::to_string(labels.size()) + ")");
  std::size_t pos = 0, neg = 0;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels(i) == 1)
      ++pos;
    else if (labels(i) == 0)
      ++neg;
    else
      throw InvalidArgumentError("labels must be 0 or 1");
    if (!std::isfinite(static_cast<double>(scores(i))))
      throw InvalidArgumentError("scores must be finite");
  }
  if (pos == 0 || neg == 0) throw SingleClassError("ROC analysis needs both classes present");
  return {pos, neg};
}

// Row indices ordered by score; ties keep index order.
template <typename ScoreDerived>
std::vector<Eigen::Index> order_by_score(const Eigen::DenseBase<ScoreDerived>& scores, bool descending) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(scores.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    return descending ? scores(a) > scores(b) : scores(a) < scores(b);
  });
  return idx;
}

}  // namespace detail

/// Sweeps the threshold over distinct scores from high to low. Tied scores
/// move together, so each distinct score contributes one point.
template <typename ScoreDerived, typename LabelDerived>
RocCurve roc_curve(const Eigen::DenseBase<ScoreDerived>& scores, const Eigen::DenseBase<LabelDerived>& labels) {
  const auto [pos, neg] = detail::check_binary(scores, labels);
  const auto idx = detail::order_by_score(scores, true);

  RocCurve curve;
  curve.fpr.push_back(0.0);
  curve.tpr.push_back(0.0);
  curve.thresholds.push_back(std::numeric_limits<double>::infinity());
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < idx.size();) {
    const auto s = scores(idx[i]);
    for (; i < idx.size() && scores(idx[i]) == s; ++i) (labels(idx[i]) == 1 ? tp : fp)++;
    curve.fpr.push_back(static_cast<double>(fp) / static_cast<double>(neg));
    curve.tpr.push_back(static_cast<double>(tp) / static_cast<double>(pos));
    curve.thresholds.push_back(static_cast<double>(s));
  }
  return curve;
}

/// Area by the trapezoid rule over the curve points.
inline double trapezoid_area(const RocCurve& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i)
    area += (curve.fpr[i] - curve.fpr[i - 1]) * (curve.tpr[i] + curve.tpr[i - 1]) * 0.5;
  return area;
}

/// Mann-Whitney AUC: the share of (positive, negative) pairs in which the
/// positive scores higher, a tied pair counting one half. Computed from tie
/// groups in integer arithmetic as 2U / (2 P N), so it matches an exhaustive
/// pair count bit for bit.
template <typename ScoreDerived, typename LabelDerived>
double auc(const Eigen::DenseBase<ScoreDerived>& scores, const Eigen::DenseBase<LabelDerived>& labels) {
  const auto [pos, neg] = detail::check_binary(scores, labels);
  const auto idx = detail::order_by_score(scores, false);
  std::uint64_t twice_u = 0;
  std::uint64_t neg_below = 0;
  for (std::size_t i = 0; i < idx.size();) {
    const auto s = scores(idx[i]);
    std::uint64_t group_pos = 0, group_neg = 0;
    for (; i < idx.size() && scores(idx[i]) == s; ++i) (labels(idx[i]) == 1 ? group_pos : group_neg)++;
    twice_u += 2 * group_pos * neg_below + group_pos * group_neg;
    neg_below += group_neg;
  }
  return static_cast<double>(twice_u) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

/// Share of rows where (score >= threshold) agrees with the label.
template <typename ScoreDerived, typename LabelDerived>
double accuracy(const Eigen::DenseBase<ScoreDerived>& scores, const Eigen::DenseBase<LabelDerived>& labels,
                double threshold) {
  if (scores.size() != labels.size())
    throw LengthMismatchError("scores and labels differ in length");
  if (scores.size() == 0) throw InvalidArgumentError("accuracy of an empty set");
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < scores.size(); ++i)
    if ((scores(i) >= threshold) == (labels(i) == 1)) ++correct;
  return static_cast<double>(correct) / static_cast<double>(scores.size());
}

struct FeatureImportance {
  std::string feature;
  double importance;
};

/// Sorted by importance, descending; equal importances keep column order.
using ImportanceReport = std::vector<FeatureImportance>;

/// Mean decrease in Gini impurity, per column, in column order: each split
/// adds (node count / root count) * (parent Gini - weighted child Gini) to its
/// feature; per-feature sums are averaged over trees and normalised to sum
/// to 1. Throws KindMismatchError for non-forest models and NoSplitError
/// when no tree has a split.
Eigen::VectorXd forest_importance_values(const TrainedModel& model);

ImportanceReport forest_importance(const TrainedModel& model, const std::vector<std::string>& feature_names);

}  // namespace dropout
