#include "dropout/metrics.hpp"

namespace dropout {

Eigen::VectorXd forest_importance_values(const TrainedModel& model) {
  const auto* forest = std::get_if<ForestModel>(&model.params);
  if (model.kind != ModelKind::RandomForest || forest == nullptr)
    throw KindMismatchError("feature importance needs a random forest, got " +
                            std::string(model_label(model.kind)));

  Eigen::VectorXd total = Eigen::VectorXd::Zero(model.width);
  bool any_split = false;
  for (const auto& tree : forest->trees) {
    const auto root = static_cast<double>(tree.nodes.front().sample_count);
    for (const auto& node : tree.nodes) {
      if (node.is_leaf()) continue;
      any_split = true;
      const auto& l = tree.nodes[static_cast<std::size_t>(node.left)];
      const auto& r = tree.nodes[static_cast<std::size_t>(node.right)];
      const auto n = static_cast<double>(node.sample_count);
      const double children =
          (static_cast<double>(l.sample_count) * l.gini() + static_cast<double>(r.sample_count) * r.gini()) / n;
      total(node.feature) += (n / root) * (node.gini() - children);
    }
  }
  if (!any_split) throw NoSplitError("every tree in the forest is a single leaf");
  total /= static_cast<double>(forest->trees.size());
  return total / total.sum();
}

ImportanceReport forest_importance(const TrainedModel& model, const std::vector<std::string>& feature_names) {
  if (static_cast<Eigen::Index>(feature_names.size()) != model.width)
    throw LengthMismatchError("feature name count differs from model width");
  const auto values = forest_importance_values(model);
  ImportanceReport report;
  for (Eigen::Index j = 0; j < values.size(); ++j)
    report.push_back({feature_names[static_cast<std::size_t>(j)], values(j)});
  std::stable_sort(report.begin(), report.end(),
                   [](const auto& a, const auto& b) { return a.importance > b.importance; });
  return report;
}

}  // namespace dropout
