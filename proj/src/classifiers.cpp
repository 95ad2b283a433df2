#include "dropout/classifiers.hpp"

#include "dropout/error.hpp"
#include "dropout/parallel.hpp"
#include "dropout/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

namespace dropout {

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::vector<Eigen::Index> all_rows(Eigen::Index n) {
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  return rows;
}

void require_rows(const BinaryDataset& train, std::string_view who) {
  if (train.rows() == 0) throw InvalidArgumentError(std::string(who) + ": empty training set");
  if (train.labels.size() != train.rows())
    throw LengthMismatchError(std::string(who) + ": label count differs from row count");
}

std::size_t ceil_sqrt(std::size_t p) {
  std::size_t m = 0;
  while (m * m < p) ++m;
  return std::max<std::size_t>(m, 1);
}

// Exact minimiser of sum_i max(0, 1 - y_i (m_i + b)) over b. The derivative
// is -P + #{breakpoints below b}, breakpoint_i = y_i - m_i, so the optimal set
// is the interval between the P-th and (P+1)-th smallest breakpoints.
double optimal_bias(const Eigen::VectorXd& margins, const Eigen::VectorXd& signs, std::size_t n_pos) {
  std::vector<double> breakpoints(static_cast<std::size_t>(margins.size()));
  for (Eigen::Index i = 0; i < margins.size(); ++i)
    breakpoints[static_cast<std::size_t>(i)] = signs(i) - margins(i);
  auto nth = breakpoints.begin() + static_cast<std::ptrdiff_t>(n_pos - 1);
  std::nth_element(breakpoints.begin(), nth, breakpoints.end());
  const double lo = *nth;
  const double hi = *std::min_element(nth + 1, breakpoints.end());
  return 0.5 * (lo + hi);
}

}  // namespace

std::string_view model_tag(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::LinearSvm: return "svc";
    case ModelKind::DecisionTree: return "dt";
    case ModelKind::RandomForest: return "rf";
    case ModelKind::Knn: return "knn";
  }
  return "unknown";
}

std::string_view model_label(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::LinearSvm: return "SVC";
    case ModelKind::DecisionTree: return "DT";
    case ModelKind::RandomForest: return "RF";
    case ModelKind::Knn: return "KNN";
  }
  return "unknown";
}

std::optional<ModelKind> parse_model_tag(std::string_view tag) noexcept {
  for (const auto kind : kModelKinds)
    if (model_tag(kind) == tag) return kind;
  return std::nullopt;
}

void HyperParams::validate() const {
  if (tree_max_depth < 1) throw InvalidArgumentError("tree_max_depth must be >= 1");
  if (forest_n_trees < 1) throw InvalidArgumentError("forest_n_trees must be >= 1");
  if (forest_feature_subsample && *forest_feature_subsample < 1)
    throw InvalidArgumentError("forest_feature_subsample must be >= 1");
  if (forest_min_leaf < 1) throw InvalidArgumentError("forest_min_leaf must be >= 1");
  if (forest_max_depth && *forest_max_depth < 1)
    throw InvalidArgumentError("forest_max_depth must be >= 1");
  if (!(svm_regularization_c > 0.0) || !std::isfinite(svm_regularization_c))
    throw InvalidArgumentError("svm_regularization_c must be positive");
  if (svm_epochs < 1) throw InvalidArgumentError("svm_epochs must be >= 1");
  if (knn_k < 1) throw InvalidArgumentError("knn_k must be >= 1");
}

TrainedModel train_decision_tree(const BinaryDataset& train, const HyperParams& hp) {
  hp.validate();
  require_rows(train, "train_decision_tree");
  const auto rows = all_rows(train.rows());
  TreeGrowth growth;
  growth.max_depth = hp.tree_max_depth;
  growth.min_leaf = 1;

  TrainedModel model;
  model.kind = ModelKind::DecisionTree;
  model.params = grow_tree(train.features, train.labels, rows, growth);
  model.width = train.cols();
  model.threads = hp.threads;
  return model;
}

TrainedModel train_random_forest(const BinaryDataset& train, const HyperParams& hp) {
  hp.validate();
  require_rows(train, "train_random_forest");
  const auto n = static_cast<std::size_t>(train.rows());

  TreeGrowth growth;
  growth.max_depth = hp.forest_max_depth;
  growth.min_leaf = hp.forest_min_leaf;
  growth.candidate_features =
      hp.forest_feature_subsample.value_or(ceil_sqrt(static_cast<std::size_t>(train.cols())));

  ForestModel forest;
  forest.trees.resize(hp.forest_n_trees);
  forest.tree_seeds.resize(hp.forest_n_trees);
  parallel_for(hp.forest_n_trees, hp.threads, [&](std::size_t t) {
    const std::uint64_t tree_seed = hp.seed ^ static_cast<std::uint64_t>(t);
    Rng rng(tree_seed, Stream::ForestTree);
    std::vector<Eigen::Index> sample(n);
    if (hp.forest_bootstrap) {
      for (auto& r : sample) r = static_cast<Eigen::Index>(rng.below(n));
    } else {
      std::iota(sample.begin(), sample.end(), Eigen::Index{0});
    }
    forest.trees[t] = grow_tree(train.features, train.labels, sample, growth, &rng);
    forest.tree_seeds[t] = tree_seed;
  });

  TrainedModel model;
  model.kind = ModelKind::RandomForest;
  model.params = std::move(forest);
  model.width = train.cols();
  model.threads = hp.threads;
  return model;
}

SvmObjective svm_objective(const FeatureMatrix& x, const LabelVector& labels, const Eigen::VectorXd& w,
                           double b, double c) {
  const Eigen::VectorXd margins = x * w;
  double hinge = 0.0;
  for (Eigen::Index i = 0; i < margins.size(); ++i) {
    const double y = labels(i) == 1 ? 1.0 : -1.0;
    hinge += std::max(0.0, 1.0 - y * (margins(i) + b));
  }
  return {0.5 * w.squaredNorm() + c * hinge, hinge};
}

TrainedModel train_linear_svm(const BinaryDataset& train, const HyperParams& hp) {
  hp.validate();
  require_rows(train, "train_linear_svm");
  const auto n = static_cast<std::size_t>(train.rows());
  const auto n_pos = static_cast<std::size_t>(train.labels.sum());
  if (n_pos == 0 || n_pos == n)
    throw SingleClassError("train_linear_svm: training labels contain a single class");

  const RowMajorMatrix x = train.features;
  const Eigen::VectorXd signs = (2 * train.labels.array() - 1).cast<double>().matrix();
  const double c = hp.svm_regularization_c;
  const double lambda = 1.0 / (c * static_cast<double>(n));

  SvmModel best;
  best.weights = Eigen::VectorXd::Zero(train.cols());
  const auto start = svm_objective(train.features, train.labels, best.weights, 0.0, c);
  best.objective = best.initial_objective = start.objective;
  best.hinge_sum = start.hinge_sum;

  Eigen::VectorXd w = Eigen::VectorXd::Zero(train.cols());
  double b = 0.0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(hp.seed, Stream::SvmShuffle);
  double t = 0.0;

  Eigen::VectorXd average = Eigen::VectorXd::Zero(train.cols());
  const auto consider = [&](const Eigen::VectorXd& candidate, std::size_t epoch) {
    const double cb = optimal_bias(train.features * candidate, signs, n_pos);
    const auto value = svm_objective(train.features, train.labels, candidate, cb, c);
    if (value.objective < best.objective) {
      best.weights = candidate;
      best.bias = cb;
      best.objective = value.objective;
      best.hinge_sum = value.hinge_sum;
      best.best_epoch = epoch;
    }
    return cb;
  };

  for (std::size_t epoch = 1; epoch <= hp.svm_epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    average.setZero();
    for (const auto i : order) {
      t += 1.0;
      const double eta = 1.0 / (lambda * t);
      const auto row = x.row(static_cast<Eigen::Index>(i));
      const double y = signs(static_cast<Eigen::Index>(i));
      const double margin = y * (row.dot(w) + b);
      w *= 1.0 - 1.0 / t;
      if (margin < 1.0) w.noalias() += (eta * y) * row.transpose();
      average += w;
    }
    average /= static_cast<double>(n);
    b = consider(w, epoch);
    consider(average, epoch);
  }
  // An iterate that separates the data but leaves some margins below 1 is
  // also tried rescaled so that its smallest margin is exactly 1.
  if (best.best_epoch > 0) {
    const Eigen::ArrayXd margins = signs.array() * ((train.features * best.weights).array() + best.bias);
    const double smallest = margins.minCoeff();
    if (smallest > 0.0 && smallest < 1.0) consider(Eigen::VectorXd(best.weights / smallest), best.best_epoch);
  }
  best.epochs = hp.svm_epochs;

  TrainedModel model;
  model.kind = ModelKind::LinearSvm;
  model.params = std::move(best);
  model.width = train.cols();
  model.threads = hp.threads;
  return model;
}

TrainedModel train_knn(const BinaryDataset& train, const HyperParams& hp) {
  hp.validate();
  require_rows(train, "train_knn");
  if (static_cast<std::size_t>(train.rows()) < hp.knn_k)
    throw InsufficientRowsError("train_knn: " + std::to_string(train.rows()) +
                                " training rows, k = " + std::to_string(hp.knn_k));
  TrainedModel model;
  model.kind = ModelKind::Knn;
  model.params = KnnModel{train.features, train.labels, hp.knn_k};
  model.width = train.cols();
  model.threads = hp.threads;
  return model;
}

TrainedModel fit_model(ModelKind kind, const BinaryDataset& train, const HyperParams& hp) {
  switch (kind) {
    case ModelKind::DecisionTree: return train_decision_tree(train, hp);
    case ModelKind::RandomForest: return train_random_forest(train, hp);
    case ModelKind::LinearSvm:
    case ModelKind::Knn: {
      require_rows(train, "fit_model");
      auto standardizer = fit_standardizer(train.features);
      BinaryDataset scaled = train;
      scaled.features = apply_standardizer(standardizer, train.features);
      auto model = kind == ModelKind::LinearSvm ? train_linear_svm(scaled, hp) : train_knn(scaled, hp);
      model.standardizer = std::move(standardizer);
      return model;
    }
  }
  throw InvalidArgumentError("fit_model: unknown model kind");
}

namespace {

Eigen::VectorXd score_knn(const KnnModel& knn, const FeatureMatrix& queries, unsigned threads) {
  const RowMajorMatrix train = knn.train;
  const RowMajorMatrix q = queries;
  const auto n = static_cast<std::size_t>(train.rows());
  const auto p = train.cols();
  Eigen::VectorXd out(q.rows());
  parallel_for(static_cast<std::size_t>(q.rows()), threads, [&](std::size_t qi) {
    std::vector<double> dist(n);
    const double* query = q.row(static_cast<Eigen::Index>(qi)).data();
    for (std::size_t i = 0; i < n; ++i) {
      const double* r = train.row(static_cast<Eigen::Index>(i)).data();
      double d = 0.0;
      for (Eigen::Index j = 0; j < p; ++j) {
        const double diff = r[j] - query[j];
        d += diff * diff;
      }
      dist[i] = d;
    }
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const auto kth = idx.begin() + static_cast<std::ptrdiff_t>(knn.k - 1);
    std::nth_element(idx.begin(), kth, idx.end(), [&](std::size_t a, std::size_t b) {
      return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
    });
    int positives = 0;
    for (auto it = idx.begin(); it <= kth; ++it) positives += knn.labels(static_cast<Eigen::Index>(*it));
    out(static_cast<Eigen::Index>(qi)) = static_cast<double>(positives) / static_cast<double>(knn.k);
  });
  return out;
}

}  // namespace

Eigen::VectorXd score(const TrainedModel& model, const FeatureMatrix& rows) {
  if (rows.cols() != model.width && rows.rows() > 0)
    throw WidthMismatchError("model expects " + std::to_string(model.width) + " columns, got " +
                             std::to_string(rows.cols()));
  if (rows.rows() == 0) return Eigen::VectorXd(0);

  const FeatureMatrix x =
      model.standardizer ? apply_standardizer(*model.standardizer, rows) : FeatureMatrix(rows);
  Eigen::VectorXd out(x.rows());
  std::visit(
      [&](const auto& params) {
        using T = std::decay_t<decltype(params)>;
        if constexpr (std::is_same_v<T, DecisionTree>) {
          for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = params.score(x.row(i));
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          for (Eigen::Index i = 0; i < x.rows(); ++i) {
            double sum = 0.0;
            for (const auto& tree : params.trees) sum += tree.score(x.row(i));
            out(i) = sum / static_cast<double>(params.trees.size());
          }
        } else if constexpr (std::is_same_v<T, SvmModel>) {
          out = (x * params.weights).array() + params.bias;
        } else {
          out = score_knn(params, x, model.threads);
        }
      },
      model.params);
  return out;
}

double decision_threshold(ModelKind kind) noexcept {
  return kind == ModelKind::LinearSvm ? 0.0 : 0.5;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

constexpr std::string_view kMagic = "dropout-model";
constexpr int kFormatVersion = 1;

void write_row(std::ostream& out, std::string_view key, const auto& values) {
  out << key;
  for (Eigen::Index i = 0; i < values.size(); ++i) out << ' ' << format_number(values(i));
  out << '\n';
}

void write_tree(std::ostream& out, const DecisionTree& tree) {
  out << "tree " << tree.nodes.size() << '\n';
  for (const auto& n : tree.nodes)
    out << n.feature << ' ' << format_number(n.threshold) << ' ' << n.left << ' ' << n.right << ' '
        << n.sample_count << ' ' << n.positive_count << ' ' << n.depth << '\n';
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string word() {
    std::string w;
    if (!(in_ >> w)) throw ModelFormatError("unexpected end of model text");
    return w;
  }
  void expect(std::string_view key) {
    const auto w = word();
    if (w != key) throw ModelFormatError("expected '" + std::string(key) + "', found '" + w + "'");
  }
  template <typename T>
  T number() {
    const auto w = word();
    T value{};
    const auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), value);
    if (ec != std::errc{} || ptr != w.data() + w.size())
      throw ModelFormatError("bad number '" + w + "'");
    return value;
  }
  Eigen::VectorXd vector(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = number<double>();
    return v;
  }
  DecisionTree tree(Eigen::Index width) {
    expect("tree");
    const auto count = number<std::size_t>();
    DecisionTree t;
    t.width = width;
    t.nodes.resize(count);
    for (auto& n : t.nodes) {
      n.feature = number<std::int32_t>();
      n.threshold = number<double>();
      n.left = number<std::int32_t>();
      n.right = number<std::int32_t>();
      n.sample_count = number<std::int64_t>();
      n.positive_count = number<std::int64_t>();
      n.depth = number<std::int32_t>();
      const auto in_range = [&](std::int32_t c) { return c >= 0 && static_cast<std::size_t>(c) < count; };
      if (n.feature >= width || (!n.is_leaf() && !(in_range(n.left) && in_range(n.right))))
        throw ModelFormatError("tree node out of range");
    }
    if (t.nodes.empty()) throw ModelFormatError("empty tree");
    return t;
  }

 private:
  std::istream& in_;
};

}  // namespace

void save_model(std::ostream& out, const TrainedModel& model) {
  out << kMagic << ' ' << kFormatVersion << '\n';
  out << "kind " << model_tag(model.kind) << '\n';
  out << "width " << model.width << '\n';
  if (model.standardizer) {
    const auto& s = *model.standardizer;
    out << "standardizer 1\n";
    write_row(out, "mean", s.mean);
    write_row(out, "stddev", s.stddev);
    out << "constant";
    for (const bool c : s.constant) out << ' ' << (c ? 1 : 0);
    out << '\n';
  } else {
    out << "standardizer 0\n";
  }
  std::visit(
      [&](const auto& params) {
        using T = std::decay_t<decltype(params)>;
        if constexpr (std::is_same_v<T, DecisionTree>) {
          write_tree(out, params);
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          out << "trees " << params.trees.size() << '\n';
          for (std::size_t t = 0; t < params.trees.size(); ++t) {
            out << "seed " << params.tree_seeds[t] << '\n';
            write_tree(out, params.trees[t]);
          }
        } else if constexpr (std::is_same_v<T, SvmModel>) {
          write_row(out, "weights", params.weights);
          out << "bias " << format_number(params.bias) << '\n';
          out << "objective " << format_number(params.objective) << " hinge "
              << format_number(params.hinge_sum) << " initial " << format_number(params.initial_objective)
              << " epochs " << params.epochs << " best_epoch " << params.best_epoch << '\n';
        } else {
          out << "k " << params.k << " rows " << params.train.rows() << '\n';
          for (Eigen::Index i = 0; i < params.train.rows(); ++i) {
            out << params.labels(i);
            for (Eigen::Index j = 0; j < params.train.cols(); ++j)
              out << ' ' << format_number(params.train(i, j));
            out << '\n';
          }
        }
      },
      model.params);
  out << "end\n";
}

TrainedModel load_model(std::istream& in) {
  Reader r(in);
  r.expect(kMagic);
  if (r.number<int>() != kFormatVersion) throw ModelFormatError("unsupported model format version");
  TrainedModel model;
  r.expect("kind");
  const auto tag = r.word();
  const auto kind = parse_model_tag(tag);
  if (!kind) throw ModelFormatError("unknown model kind '" + tag + "'");
  model.kind = *kind;
  r.expect("width");
  model.width = r.number<Eigen::Index>();
  r.expect("standardizer");
  if (r.number<int>() == 1) {
    Standardizer s;
    r.expect("mean");
    s.mean = r.vector(model.width).transpose().array();
    r.expect("stddev");
    s.stddev = r.vector(model.width).transpose().array();
    r.expect("constant");
    for (Eigen::Index j = 0; j < model.width; ++j) s.constant.push_back(r.number<int>() != 0);
    model.standardizer = std::move(s);
  }
  switch (model.kind) {
    case ModelKind::DecisionTree: model.params = r.tree(model.width); break;
    case ModelKind::RandomForest: {
      ForestModel forest;
      r.expect("trees");
      const auto count = r.number<std::size_t>();
      for (std::size_t t = 0; t < count; ++t) {
        r.expect("seed");
        forest.tree_seeds.push_back(r.number<std::uint64_t>());
        forest.trees.push_back(r.tree(model.width));
      }
      if (forest.trees.empty()) throw ModelFormatError("forest without trees");
      model.params = std::move(forest);
      break;
    }
    case ModelKind::LinearSvm: {
      SvmModel svm;
      r.expect("weights");
      svm.weights = r.vector(model.width);
      r.expect("bias");
      svm.bias = r.number<double>();
      r.expect("objective");
      svm.objective = r.number<double>();
      r.expect("hinge");
      svm.hinge_sum = r.number<double>();
      r.expect("initial");
      svm.initial_objective = r.number<double>();
      r.expect("epochs");
      svm.epochs = r.number<std::size_t>();
      r.expect("best_epoch");
      svm.best_epoch = r.number<std::size_t>();
      model.params = std::move(svm);
      break;
    }
    case ModelKind::Knn: {
      KnnModel knn;
      r.expect("k");
      knn.k = r.number<std::size_t>();
      r.expect("rows");
      const auto rows = r.number<Eigen::Index>();
      knn.train.resize(rows, model.width);
      knn.labels.resize(rows);
      for (Eigen::Index i = 0; i < rows; ++i) {
        knn.labels(i) = r.number<int>();
        for (Eigen::Index j = 0; j < model.width; ++j) knn.train(i, j) = r.number<double>();
      }
      if (knn.k < 1 || static_cast<Eigen::Index>(knn.k) > rows)
        throw ModelFormatError("knn k out of range");
      model.params = std::move(knn);
      break;
    }
  }
  r.expect("end");
  return model;
}

}  // namespace dropout
