#pragma once

#include "dropout/classifiers.hpp"
#include "dropout/metrics.hpp"
#include "dropout/preprocess.hpp"
#include "dropout/schema.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace dropout {

inline const std::vector<std::uint64_t> kDefaultSeeds = {42, 43, 44, 45, 46};

struct RunConfig {
  std::filesystem::path data_path;
  std::optional<std::filesystem::path> manifest_path;  // default manifest when absent
  char delimiter = ';';
  std::optional<FeatureGroup> excluded_group;
  std::vector<ModelKind> models{kModelKinds.begin(), kModelKinds.end()};
  std::vector<std::uint64_t> seeds = kDefaultSeeds;
  double test_fraction = 0.2;
  HyperParams hp;

  void validate() const;
};

/// Final SVM state, kept so a regression in the optimiser shows in reports.
struct SvmConvergence {
  double objective;
  double initial_objective;
  double hinge_sum;
  std::size_t epochs;
  std::size_t best_epoch;
};

/// Held-out evaluation of one (model, feature subset, seed) run.
struct RocReport {
  ModelKind model = ModelKind::DecisionTree;
  std::optional<FeatureGroup> excluded_group;
  std::uint64_t seed = 0;
  double auc = 0.0;
  RocCurve curve;
  double accuracy = 0.0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  std::size_t feature_count = 0;
  std::optional<SvmConvergence> svm;
};

/// Loads the dataset and manifest named by the config and drops Enrolled rows.
BinaryDataset load_binary(const RunConfig& config);

/// Split, train and score one model on one split. `data` is already
/// projected onto the feature subset being evaluated.
RocReport evaluate(const BinaryDataset& data, const SplitIndices& split, ModelKind model,
                   const HyperParams& hp, std::optional<FeatureGroup> excluded_group);

/// One report per (seed, model), seeds outermost, models in config order.
/// Uses config.excluded_group when set.
std::vector<RocReport> run_baseline(const BinaryDataset& data, const RunConfig& config);
std::vector<RocReport> run_baseline(const RunConfig& config);

/// Grid of across-seed mean AUCs. Columns are the baseline followed by the
/// exclusion of each group in alphabetical order; every column of one seed
/// reuses that seed's split.
struct AblationReport {
  std::vector<ModelKind> models;
  std::vector<std::optional<FeatureGroup>> columns;
  Eigen::MatrixXd mean_auc;     // models x columns
  Eigen::MatrixXd seed_stddev;  // sample stddev across seeds, per cell
  Eigen::RowVectorXd column_mean;
  Eigen::RowVectorXd column_stddev;  // sample stddev across models, per column
  std::vector<RocReport> runs;       // seed, then column, then model
  std::string manifest_version;
  std::vector<std::uint64_t> seeds;
  double test_fraction = 0.2;
  HyperParams hp;
};

/// Ignores config.excluded_group. Throws UnknownGroupError if the dataset
/// lacks columns of some group.
AblationReport run_ablation(const BinaryDataset& data, const RunConfig& config);
AblationReport run_ablation(const RunConfig& config);

struct GroupInfluence {
  FeatureGroup group;
  double auc_drop;  // baseline column mean minus exclusion column mean
};

/// Sorted by drop, largest first; equal drops in alphabetical order.
/// Negative drops are reported as they are.
std::vector<GroupInfluence> rank_group_influence(const AblationReport& report);

/// Sample standard deviation (n - 1); 0 for fewer than two values.
double sample_stddev(const Eigen::Ref<const Eigen::VectorXd>& values);

}  // namespace dropout
