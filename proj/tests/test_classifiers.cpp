#include "helpers.hpp"

#include "dropout/classifiers.hpp"
#include "dropout/metrics.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

using namespace dropout;

namespace {

BinaryDataset standardized(const BinaryDataset& d) {
  auto out = d;
  out.features = apply_standardizer(fit_standardizer(d.features), d.features);
  return out;
}

// Brute force: all n distances, full stable sort by (distance, index).
Eigen::VectorXd knn_oracle(const Eigen::MatrixXd& train, const Eigen::VectorXi& y, const Eigen::MatrixXd& q,
                           std::size_t k) {
  Eigen::VectorXd out(q.rows());
  for (Eigen::Index a = 0; a < q.rows(); ++a) {
    std::vector<std::pair<double, Eigen::Index>> d;
    for (Eigen::Index i = 0; i < train.rows(); ++i) {
      double s = 0.0;
      for (Eigen::Index j = 0; j < train.cols(); ++j) s += (train(i, j) - q(a, j)) * (train(i, j) - q(a, j));
      d.emplace_back(s, i);
    }
    std::sort(d.begin(), d.end());
    int pos = 0;
    for (std::size_t r = 0; r < k; ++r) pos += y(d[r].second);
    out(a) = static_cast<double>(pos) / static_cast<double>(k);
  }
  return out;
}

// 20 points, 10 per class, separated with margin at least 1 by w0 = (1, 0), b0 = 0.
BinaryDataset separable_points() {
  Rng rng(8, Stream::Fixture);
  Eigen::MatrixXd x(20, 2);
  Eigen::VectorXi y(20);
  for (Eigen::Index i = 0; i < 20; ++i) {
    y(i) = i % 2;
    const double side = y(i) == 1 ? 1.0 : -1.0;
    x(i, 0) = side * (1.5 + rng.uniform());
    x(i, 1) = 2.0 * rng.normal();
  }
  return testing::make_binary(x, y);
}

}  // namespace

TEST_SUITE("svm") {
  TEST_CASE("one-dimensional pair") {
    Eigen::MatrixXd x(2, 1);
    x << -1.0, 1.0;
    const auto d = testing::make_binary(x, testing::labels({0, 1}));
    HyperParams hp;
    hp.svm_regularization_c = 100.0;
    const auto m = train_linear_svm(d, hp);
    const auto& svm = std::get<SvmModel>(m.params);
    CHECK(svm.weights(0) > 0.0);
    CHECK(accuracy(score(m, x), d.labels, 0.0) == 1.0);
    // Analytic optimum: w = 1, b = 0, hinge 0, objective 1/2.
    CHECK(svm.objective == doctest::Approx(0.5).epsilon(1e-3));
  }

  TEST_CASE("separable 20-point fixture has zero hinge at the optimum found") {
    const auto d = separable_points();
    for (Eigen::Index i = 0; i < 20; ++i) {
      const double y = d.labels(i) == 1 ? 1.0 : -1.0;
      REQUIRE(y * d.features(i, 0) >= 1.0);  // exhaustive separability check with (w0, b0)
    }
    const auto m = train_linear_svm(d, HyperParams{});
    const auto& svm = std::get<SvmModel>(m.params);
    CHECK(std::abs(svm.hinge_sum) <= 1e-6);
    CHECK(accuracy(score(m, d.features), d.labels, 0.0) == 1.0);
  }

  TEST_CASE("negating the features negates w and keeps b") {
    const auto d = standardized(testing::fixture_binary({300, 3, FeatureGroup::Academic, 1.0}));
    auto neg = d;
    neg.features = -d.features;
    const auto a = std::get<SvmModel>(train_linear_svm(d, HyperParams{}).params);
    const auto b = std::get<SvmModel>(train_linear_svm(neg, HyperParams{}).params);
    CHECK(b.weights == -a.weights);
    CHECK(b.bias == a.bias);
    CHECK(b.objective == a.objective);
  }

  TEST_CASE("negating features and labels flips every score sign") {
    const auto all = testing::fixture_binary({400, 4, FeatureGroup::Socioeconomic, 1.0});
    const auto s = split(static_cast<std::size_t>(all.rows()), 0.2, 42);
    const auto train = select_rows(all, s.train_rows);
    const auto test = select_rows(all, s.test_rows);
    auto mirrored = train;
    mirrored.features = -train.features;
    mirrored.labels = (1 - train.labels.array()).matrix();

    const auto m = fit_model(ModelKind::LinearSvm, train, HyperParams{});
    const auto mm = fit_model(ModelKind::LinearSvm, mirrored, HyperParams{});
    const Eigen::VectorXd s0 = score(m, test.features);
    const Eigen::VectorXd s1 = score(mm, Eigen::MatrixXd(-test.features));
    CHECK(s1 == -s0);
    bool flipped = true;
    for (Eigen::Index i = 0; i < s0.size(); ++i)
      if (s0(i) != 0.0) flipped = flipped && std::signbit(s0(i)) != std::signbit(s1(i));
    CHECK(flipped);
  }

  TEST_CASE("objective never exceeds the starting point") {
    for (const double c : {0.01, 1.0, 50.0}) {
      const auto d = standardized(testing::fixture_binary({300, 5, FeatureGroup::Academic, 0.7}));
      HyperParams hp;
      hp.svm_regularization_c = c;
      hp.svm_epochs = 30;
      const auto svm = std::get<SvmModel>(train_linear_svm(d, hp).params);
      CHECK(svm.initial_objective == doctest::Approx(c * static_cast<double>(d.rows())));
      CHECK(svm.objective <= svm.initial_objective);
      const auto check = svm_objective(d.features, d.labels, svm.weights, svm.bias, c);
      CHECK(check.objective == doctest::Approx(svm.objective).epsilon(1e-12));
    }
  }

  TEST_CASE("objective matches a hand computation") {
    Eigen::MatrixXd x(3, 1);
    x << 1.0, -2.0, 0.5;
    const auto y = testing::labels({1, 0, 0});
    Eigen::VectorXd w(1);
    w << 0.5;
    // margins y(wx+b) with b = 0.25: 0.75, 0.75, -0.5 -> hinge 0.25 + 0.25 + 1.5
    const auto v = svm_objective(x, y, w, 0.25, 2.0);
    CHECK(v.hinge_sum == doctest::Approx(2.0));
    CHECK(v.objective == doctest::Approx(0.125 + 4.0));
  }

  TEST_CASE("bias is optimal for the returned weights") {
    const auto d = standardized(testing::fixture_binary({250, 7, FeatureGroup::Academic, 0.8}));
    HyperParams hp;
    hp.svm_epochs = 20;
    const auto svm = std::get<SvmModel>(train_linear_svm(d, hp).params);
    const double at = svm_objective(d.features, d.labels, svm.weights, svm.bias, 1.0).objective;
    for (const double step : {-0.1, -1e-3, 1e-3, 0.1})
      CHECK(at <= svm_objective(d.features, d.labels, svm.weights, svm.bias + step, 1.0).objective + 1e-9);
  }

  TEST_CASE("single class is rejected") {
    const auto d = testing::make_binary(Eigen::MatrixXd::Random(10, 2), Eigen::VectorXi::Ones(10));
    CHECK_THROWS_AS(train_linear_svm(d, HyperParams{}), SingleClassError);
  }

  TEST_CASE("training is deterministic") {
    const auto d = standardized(testing::fixture_binary({200, 9, FeatureGroup::Academic, 1.0}));
    HyperParams hp;
    hp.svm_epochs = 15;
    const auto a = std::get<SvmModel>(train_linear_svm(d, hp).params);
    const auto b = std::get<SvmModel>(train_linear_svm(d, hp).params);
    CHECK(a.weights == b.weights);
    CHECK(a.bias == b.bias);
  }
}

TEST_SUITE("knn") {
  TEST_CASE("k = 1 returns the label of an exact match") {
    const auto d = testing::random_binary(40, 3, 4);
    HyperParams hp;
    hp.knn_k = 1;
    const auto m = train_knn(d, hp);
    CHECK(score(m, d.features) == d.labels.cast<double>());
  }

  TEST_CASE("k = 3 with nearest labels 1, 1, 0") {
    Eigen::MatrixXd x(5, 1);
    x << 0.0, 1.0, 2.0, 10.0, 11.0;
    const auto d = testing::make_binary(x, testing::labels({1, 1, 0, 0, 0}));
    HyperParams hp;
    hp.knn_k = 3;
    Eigen::MatrixXd q(1, 1);
    q << 0.9;
    CHECK(score(train_knn(d, hp), q)(0) == 2.0 / 3.0);
  }

  TEST_CASE("distance ties go to the lower row index") {
    Eigen::MatrixXd x(4, 1);
    x << -1.0, 1.0, -1.0, 1.0;
    const auto d = testing::make_binary(x, testing::labels({1, 0, 0, 1}));
    HyperParams hp;
    hp.knn_k = 1;
    Eigen::MatrixXd q(1, 1);
    q << 0.0;
    CHECK(score(train_knn(d, hp), q)(0) == 1.0);  // rows 0..3 all at distance 1; row 0 wins
    hp.knn_k = 2;
    CHECK(score(train_knn(d, hp), q)(0) == 0.5);
  }

  TEST_CASE("k = 20 scores are multiples of 1/20") {
    const auto d = testing::fixture_binary({500, 3, FeatureGroup::Academic, 1.0});
    const auto m = fit_model(ModelKind::Knn, d, HyperParams{});
    const Eigen::VectorXd s = score(m, d.features);
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      const double scaled = s(i) * 20.0;
      CHECK(scaled == std::round(scaled));
      CHECK(s(i) >= 0.0);
      CHECK(s(i) <= 1.0);
    }
  }

  TEST_CASE("matches the brute-force oracle") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      const bool grid = seed % 2 == 0;  // integer grids produce many exact distance ties
      const auto train = testing::random_binary(static_cast<Eigen::Index>(60 + 28 * seed), 4, seed, grid);
      const auto query = testing::random_binary(50, 4, seed + 100, grid);
      for (const std::size_t k : {1u, 3u, 7u, 20u}) {
        HyperParams hp;
        hp.knn_k = k;
        hp.threads = static_cast<unsigned>(seed % 3 + 1);
        const auto m = train_knn(train, hp);
        CHECK(score(m, query.features) == knn_oracle(train.features, train.labels, query.features, k));
      }
    }
  }

  TEST_CASE("too few rows") {
    const auto d = testing::random_binary(10, 2, 1);
    CHECK_THROWS_AS(train_knn(d, HyperParams{}), InsufficientRowsError);
  }
}

TEST_SUITE("scoring") {
  TEST_CASE("empty input gives empty output") {
    const auto d = testing::random_binary(30, 3, 1);
    for (const auto kind : kModelKinds) {
      HyperParams hp;
      hp.forest_n_trees = 3;
      hp.knn_k = 5;
      const auto m = fit_model(kind, d, hp);
      CHECK(score(m, Eigen::MatrixXd(0, 3)).size() == 0);
      CHECK_THROWS_AS(score(m, Eigen::MatrixXd::Zero(2, 4)), WidthMismatchError);
      const Eigen::VectorXd s = score(m, d.features);
      CHECK(s.allFinite());
    }
  }

  TEST_CASE("standardizer is attached only to SVM and KNN") {
    const auto d = testing::random_binary(30, 3, 2);
    HyperParams hp;
    hp.forest_n_trees = 2;
    hp.knn_k = 3;
    CHECK(fit_model(ModelKind::LinearSvm, d, hp).standardizer.has_value());
    CHECK(fit_model(ModelKind::Knn, d, hp).standardizer.has_value());
    CHECK_FALSE(fit_model(ModelKind::DecisionTree, d, hp).standardizer.has_value());
    CHECK_FALSE(fit_model(ModelKind::RandomForest, d, hp).standardizer.has_value());
  }

  TEST_CASE("thresholds") {
    CHECK(decision_threshold(ModelKind::LinearSvm) == 0.0);
    CHECK(decision_threshold(ModelKind::Knn) == 0.5);
    CHECK(decision_threshold(ModelKind::RandomForest) == 0.5);
    CHECK(decision_threshold(ModelKind::DecisionTree) == 0.5);
  }

  TEST_CASE("model tags") {
    for (const auto kind : kModelKinds) CHECK(parse_model_tag(model_tag(kind)) == kind);
    CHECK_FALSE(parse_model_tag("all").has_value());
  }

  TEST_CASE("hyperparameter validation") {
    HyperParams hp;
    CHECK_NOTHROW(hp.validate());
    hp.svm_regularization_c = 0.0;
    CHECK_THROWS_AS(hp.validate(), InvalidArgumentError);
    hp = HyperParams{};
    hp.knn_k = 0;
    CHECK_THROWS_AS(hp.validate(), InvalidArgumentError);
    hp = HyperParams{};
    hp.forest_n_trees = 0;
    CHECK_THROWS_AS(hp.validate(), InvalidArgumentError);
  }

  TEST_CASE("save and load round trip") {
    const auto d = testing::fixture_binary({200, 5, FeatureGroup::Academic, 1.0});
    HyperParams hp;
    hp.forest_n_trees = 5;
    hp.svm_epochs = 10;
    for (const auto kind : kModelKinds) {
      const auto m = fit_model(kind, d, hp);
      std::stringstream buf;
      save_model(buf, m);
      const auto back = load_model(buf);
      CHECK(back.kind == kind);
      CHECK(back.width == m.width);
      CHECK(score(back, d.features) == score(m, d.features));
    }
    std::istringstream junk("not a model");
    CHECK_THROWS_AS(load_model(junk), ModelFormatError);
    std::istringstream truncated("dropout-model 1\nkind dt\n");
    CHECK_THROWS_AS(load_model(truncated), ModelFormatError);
  }
}
