#include "dropout/experiments.hpp"

#include "dropout/error.hpp"
#include "dropout/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace dropout {

void RunConfig::validate() const {
  if (seeds.empty()) throw InvalidArgumentError("at least one seed is required");
  if (models.empty()) throw InvalidArgumentError("at least one model is required");
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw InvalidFractionError("test fraction must lie in (0, 1)");
  hp.validate();
}

BinaryDataset load_binary(const RunConfig& config) {
  const GroupManifest manifest =
      config.manifest_path ? load_manifest(*config.manifest_path) : default_manifest();
  return to_binary(load_dataset(config.data_path, manifest, config.delimiter));
}

RocReport evaluate(const BinaryDataset& data, const SplitIndices& split, ModelKind model,
                   const HyperParams& hp, std::optional<FeatureGroup> excluded_group) {
  const auto train = select_rows(data, split.train_rows);
  const auto test = select_rows(data, split.test_rows);
  const auto fitted = fit_model(model, train, hp);
  const Eigen::VectorXd scores = score(fitted, test.features);

  RocReport report;
  report.model = model;
  report.excluded_group = excluded_group;
  report.seed = split.seed;
  report.auc = auc(scores, test.labels);
  report.curve = roc_curve(scores, test.labels);
  report.accuracy = accuracy(scores, test.labels, decision_threshold(model));
  report.train_rows = split.train_rows.size();
  report.test_rows = split.test_rows.size();
  report.feature_count = static_cast<std::size_t>(data.cols());
  if (const auto* svm = std::get_if<SvmModel>(&fitted.params))
    report.svm = SvmConvergence{svm->objective, svm->initial_objective, svm->hinge_sum, svm->epochs,
                                svm->best_epoch};
  return report;
}

namespace {

// Parallelism goes to the outer task list when it is long enough to use
// every worker; otherwise the tasks keep their inner threads.
HyperParams task_params(HyperParams hp, std::size_t tasks) {
  if (tasks >= hp.threads) hp.threads = 1;
  return hp;
}

}  // namespace

std::vector<RocReport> run_baseline(const BinaryDataset& data, const RunConfig& config) {
  config.validate();
  const BinaryDataset subset =
      config.excluded_group ? exclude_group(data, *config.excluded_group) : data;

  std::vector<SplitIndices> splits;
  for (const auto seed : config.seeds)
    splits.push_back(split(static_cast<std::size_t>(data.rows()), config.test_fraction, seed));

  const std::size_t n_models = config.models.size();
  std::vector<RocReport> reports(config.seeds.size() * n_models);
  const auto hp = task_params(config.hp, reports.size());
  parallel_for(reports.size(), config.hp.threads, [&](std::size_t task) {
    auto seeded = hp;
    seeded.seed = config.seeds[task / n_models];
    reports[task] = evaluate(subset, splits[task / n_models], config.models[task % n_models], seeded,
                             config.excluded_group);
  });
  return reports;
}

std::vector<RocReport> run_baseline(const RunConfig& config) {
  return run_baseline(load_binary(config), config);
}

double sample_stddev(const Eigen::Ref<const Eigen::VectorXd>& values) {
  if (values.size() < 2) return 0.0;
  const double mean = values.mean();
  return std::sqrt((values.array() - mean).square().sum() / static_cast<double>(values.size() - 1));
}

AblationReport run_ablation(const BinaryDataset& data, const RunConfig& config) {
  config.validate();

  AblationReport report;
  report.models = config.models;
  report.columns.push_back(std::nullopt);
  for (const auto g : kFeatureGroups) report.columns.emplace_back(g);
  report.manifest_version = data.manifest_version;
  report.seeds = config.seeds;
  report.test_fraction = config.test_fraction;
  report.hp = config.hp;

  std::vector<BinaryDataset> subsets;
  subsets.push_back(data);
  for (const auto g : kFeatureGroups) subsets.push_back(exclude_group(data, g));

  std::vector<SplitIndices> splits;
  for (const auto seed : config.seeds)
    splits.push_back(split(static_cast<std::size_t>(data.rows()), config.test_fraction, seed));

  const std::size_t n_models = report.models.size();
  const std::size_t n_cols = report.columns.size();
  const std::size_t n_seeds = config.seeds.size();
  report.runs.resize(n_seeds * n_cols * n_models);
  const auto hp = task_params(config.hp, report.runs.size());
  parallel_for(report.runs.size(), config.hp.threads, [&](std::size_t task) {
    const std::size_t s = task / (n_cols * n_models);
    const std::size_t c = (task / n_models) % n_cols;
    const std::size_t m = task % n_models;
    auto seeded = hp;
    seeded.seed = config.seeds[s];
    report.runs[task] = evaluate(subsets[c], splits[s], report.models[m], seeded, report.columns[c]);
  });

  const auto rows = static_cast<Eigen::Index>(n_models);
  const auto cols = static_cast<Eigen::Index>(n_cols);
  report.mean_auc.resize(rows, cols);
  report.seed_stddev.resize(rows, cols);
  for (std::size_t m = 0; m < n_models; ++m) {
    for (std::size_t c = 0; c < n_cols; ++c) {
      Eigen::VectorXd per_seed(static_cast<Eigen::Index>(n_seeds));
      for (std::size_t s = 0; s < n_seeds; ++s)
        per_seed(static_cast<Eigen::Index>(s)) = report.runs[(s * n_cols + c) * n_models + m].auc;
      report.mean_auc(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(c)) = per_seed.mean();
      report.seed_stddev(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(c)) = sample_stddev(per_seed);
    }
  }
  report.column_mean = report.mean_auc.colwise().mean();
  report.column_stddev.resize(cols);
  for (Eigen::Index c = 0; c < cols; ++c) report.column_stddev(c) = sample_stddev(report.mean_auc.col(c));
  return report;
}

AblationReport run_ablation(const RunConfig& config) { return run_ablation(load_binary(config), config); }

std::vector<GroupInfluence> rank_group_influence(const AblationReport& report) {
  std::vector<GroupInfluence> out;
  for (std::size_t c = 1; c < report.columns.size(); ++c) {
    if (!report.columns[c]) continue;
    out.push_back({*report.columns[c], report.column_mean(0) - report.column_mean(static_cast<Eigen::Index>(c))});
  }
  std::sort(out.begin(), out.end(), [](const GroupInfluence& a, const GroupInfluence& b) {
    if (a.auc_drop != b.auc_drop) return a.auc_drop > b.auc_drop;
    return to_string(a.group) < to_string(b.group);
  });
  return out;
}

}  // namespace dropout
