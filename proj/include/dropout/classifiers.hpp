#pragma once

#include "dropout/preprocess.hpp"
#include "dropout/schema.hpp"
#include "dropout/tree.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

namespace dropout {

enum class ModelKind { LinearSvm, DecisionTree, RandomForest, Knn };

/// Report order (SVC, DT, RF, KNN).
inline constexpr std::array<ModelKind, 4> kModelKinds = {ModelKind::LinearSvm, ModelKind::DecisionTree,
                                                         ModelKind::RandomForest, ModelKind::Knn};

/// Short tag used on the command line and in file names: svc, dt, rf, knn.
std::string_view model_tag(ModelKind kind) noexcept;
/// Display label: SVC, DT, RF, KNN.
std::string_view model_label(ModelKind kind) noexcept;
std::optional<ModelKind> parse_model_tag(std::string_view tag) noexcept;

struct HyperParams {
  std::int32_t tree_max_depth = 5;

  std::size_t forest_n_trees = 100;
  /// Candidate features per split; nullopt means ceil(sqrt(p)).
  std::optional<std::size_t> forest_feature_subsample;
  std::int64_t forest_min_leaf = 1;
  /// nullopt grows every tree until its leaves are pure.
  std::optional<std::int32_t> forest_max_depth;
  /// Off only in tests that compare a one-tree forest with a plain tree.
  bool forest_bootstrap = true;

  double svm_regularization_c = 1.0;
  std::size_t svm_epochs = 200;

  std::size_t knn_k = 20;

  std::uint64_t seed = 42;

  /// Worker threads for forest training and batch scoring. Never changes
  /// results.
  unsigned threads = 1;

  void validate() const;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  std::vector<std::uint64_t> tree_seeds;
};

/// Primal linear SVM plus its convergence record.
struct SvmModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
  double objective = 0.0;   // 1/2 |w|^2 + C * hinge_sum, at the retained (w, b)
  double hinge_sum = 0.0;   // sum of hinge losses, without the C factor
  double initial_objective = 0.0;
  std::size_t epochs = 0;
  std::size_t best_epoch = 0;  // 0 means the retained iterate is (0, 0)
};

struct KnnModel {
  FeatureMatrix train;
  LabelVector labels;
  std::size_t k = 0;
};

struct TrainedModel {
  ModelKind kind = ModelKind::DecisionTree;
  std::variant<DecisionTree, ForestModel, SvmModel, KnnModel> params;
  /// Applied to incoming rows by score() when present.
  std::optional<Standardizer> standardizer;
  Eigen::Index width = 0;
  unsigned threads = 1;
};

TrainedModel train_decision_tree(const BinaryDataset& train, const HyperParams& hp);

/// Each tree t draws its bootstrap and its per-split feature subsets from
/// `Rng(hp.seed ^ t, Stream::ForestTree)`, so a tree depends only on the data,
/// the hyperparameters and its index. Trees are trained in parallel.
TrainedModel train_random_forest(const BinaryDataset& train, const HyperParams& hp);

/// Minimises 1/2 |w|^2 + C * sum_i max(0, 1 - y_i (w.x_i + b)), y in {-1, +1}.
///
/// Each epoch visits the rows in a fresh permutation from
/// `Rng(hp.seed, Stream::SvmShuffle)`. With lambda = 1 / (C n) and a global
/// step counter t = 1, 2, ..., the step size is eta_t = 1 / (lambda t) and the
/// weight update is w <- (1 - eta_t lambda) w + eta_t y_i x_i when the margin
/// of row i is below 1, and w <- (1 - eta_t lambda) w otherwise. The bias is
/// held during an epoch and afterwards set to the exact minimiser of the
/// hinge sum for the current w (midpoint of the optimal interval). After
/// every epoch two candidates are scored: the last iterate and the mean of
/// the epoch's iterates, each with its own exact bias. The lowest objective
/// seen, including the (0, 0) start, is retained. Finally, if the retained
/// (w, b) separates the data with some margins below 1, its rescaling to
/// minimum margin 1 is scored as one more candidate.
///
/// Expects standardized features. Throws SingleClassError when one class is
/// absent.
TrainedModel train_linear_svm(const BinaryDataset& train, const HyperParams& hp);

/// Stores the rows. score = positive share of the k nearest training rows by
/// Euclidean distance, ties at equal distance going to the lower row index.
/// Throws InsufficientRowsError when there are fewer than k rows.
TrainedModel train_knn(const BinaryDataset& train, const HyperParams& hp);

/// Trains `kind` on raw features. SVM and KNN get a standardizer fitted on
/// `train`, stored in the model and applied by score(); trees see raw values.
TrainedModel fit_model(ModelKind kind, const BinaryDataset& train, const HyperParams& hp);

/// One finite score per row, larger meaning more dropout-like.
/// Throws WidthMismatchError when the column count differs from training.
Eigen::VectorXd score(const TrainedModel& model, const FeatureMatrix& rows);

/// Threshold that turns scores into hard labels: 0 for the SVM margin, 0.5
/// for the probability-like scores of the other models.
double decision_threshold(ModelKind kind) noexcept;

/// Objective value of (w, b) on standardized data, and its hinge sum.
struct SvmObjective {
  double objective;
  double hinge_sum;
};
SvmObjective svm_objective(const FeatureMatrix& x, const LabelVector& labels, const Eigen::VectorXd& w,
                           double b, double c);

/// Text serialization, format "dropout-model 1" (see docs/model_format.md).
void save_model(std::ostream& out, const TrainedModel& model);
TrainedModel load_model(std::istream& in);

}  // namespace dropout
