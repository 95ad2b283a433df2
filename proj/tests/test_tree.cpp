#include "helpers.hpp"

#include "dropout/classifiers.hpp"
#include "dropout/metrics.hpp"
#include "dropout/tree.hpp"

#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <numeric>

using namespace dropout;

namespace {

std::vector<Eigen::Index> all_rows(Eigen::Index n) {
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  return rows;
}

// Independent rational form of "weighted child Gini < parent Gini":
// sum_c p_c q_c / n_c < p q / n.
bool child_gini_strictly_lower(const DecisionTree& t, const TreeNode& node) {
  using Wide = __int128;
  const auto& l = t.nodes[static_cast<std::size_t>(node.left)];
  const auto& r = t.nodes[static_cast<std::size_t>(node.right)];
  const Wide n = node.sample_count, p = node.positive_count, q = n - p;
  const Wide nl = l.sample_count, pl = l.positive_count, ql = nl - pl;
  const Wide nr = r.sample_count, pr = r.positive_count, qr = nr - pr;
  return (pl * ql * nr + pr * qr * nl) * n < p * q * nl * nr;
}

void check_tree_shape(const DecisionTree& t, std::int32_t max_depth) {
  CHECK(t.depth() <= max_depth);
  for (const auto& node : t.nodes) {
    CHECK(node.depth <= max_depth);
    if (node.is_leaf()) continue;
    const auto& l = t.nodes[static_cast<std::size_t>(node.left)];
    const auto& r = t.nodes[static_cast<std::size_t>(node.right)];
    CHECK(l.sample_count + r.sample_count == node.sample_count);
    CHECK(l.positive_count + r.positive_count == node.positive_count);
    CHECK(l.depth == node.depth + 1);
    CHECK(child_gini_strictly_lower(t, node));
  }
}

bool same_tree(const DecisionTree& a, const DecisionTree& b) {
  if (a.nodes.size() != b.nodes.size() || a.width != b.width) return false;
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    const auto& x = a.nodes[i];
    const auto& y = b.nodes[i];
    if (x.feature != y.feature || std::bit_cast<std::uint64_t>(x.threshold) != std::bit_cast<std::uint64_t>(y.threshold) ||
        x.left != y.left || x.right != y.right || x.sample_count != y.sample_count ||
        x.positive_count != y.positive_count || x.depth != y.depth)
      return false;
  }
  return true;
}

BinaryDataset xor_points() {
  Eigen::MatrixXd x(4, 2);
  x << 0, 0,
       1, 1,
       0, 1,
       1, 0;
  return testing::make_binary(x, testing::labels({0, 0, 1, 1}));
}

}  // namespace

TEST_SUITE("tree") {
  TEST_CASE("pure training set gives one leaf") {
    const auto d = testing::make_binary(Eigen::MatrixXd::Random(6, 3), Eigen::VectorXi::Ones(6));
    const auto m = train_decision_tree(d, HyperParams{});
    const auto& t = std::get<DecisionTree>(m.params);
    CHECK(t.nodes.size() == 1);
    const Eigen::VectorXd s = score(m, Eigen::MatrixXd::Random(5, 3) * 100.0);
    CHECK((s.array() == 1.0).all());
  }

  TEST_CASE("XOR: every root split is zero-gain") {
    // Splitting either feature at 0.5 leaves one positive and one negative
    // on each side, so the weighted Gini stays at 0.5.
    const auto d = xor_points();
    const auto rows = all_rows(4);
    const auto strict = grow_tree(d.features, d.labels, rows, TreeGrowth{5, 1, std::nullopt});
    CHECK(strict.nodes.size() == 1);
    CHECK(strict.nodes[0].positive_fraction() == 0.5);
  }

  TEST_CASE("XOR: with zero-gain splits allowed, a depth-2 tree fits it exactly") {
    const auto d = xor_points();
    const auto rows = all_rows(4);
    TreeGrowth g{5, 1, std::nullopt};
    g.allow_zero_gain = true;
    const auto t = grow_tree(d.features, d.labels, rows, g);
    CHECK(t.depth() == 2);
    CHECK(t.leaf_count() == 4);
    CHECK(t.nodes[0].feature == 0);  // tie between features goes to the lower index
    CHECK(t.nodes[0].threshold == 0.5);
    Eigen::VectorXd s(4);
    for (Eigen::Index i = 0; i < 4; ++i) s(i) = t.score(d.features.row(i));
    CHECK(accuracy(s, d.labels, 0.5) == 1.0);
  }

  TEST_CASE("threshold is the midpoint and ties go to the lower feature") {
    Eigen::MatrixXd x(4, 2);
    x << 1, 1,
         1, 1,
         3, 3,
         3, 3;
    const auto d = testing::make_binary(x, testing::labels({0, 0, 1, 1}));
    const auto m = train_decision_tree(d, HyperParams{});
    const auto& t = std::get<DecisionTree>(m.params);
    REQUIRE(t.nodes.size() == 3);
    CHECK(t.nodes[0].feature == 0);
    CHECK(t.nodes[0].threshold == 2.0);
    CHECK(t.nodes[t.nodes[0].left].positive_fraction() == 0.0);
    CHECK(t.nodes[t.nodes[0].right].positive_fraction() == 1.0);
  }

  TEST_CASE("adjacent doubles still split") {
    Eigen::MatrixXd x(2, 1);
    x << 1.0, std::nextafter(1.0, 2.0);
    const auto d = testing::make_binary(x, testing::labels({0, 1}));
    const auto m = train_decision_tree(d, HyperParams{});
    const Eigen::VectorXd s = score(m, x);
    CHECK(s(0) == 0.0);
    CHECK(s(1) == 1.0);
  }

  TEST_CASE("depth bound and strict impurity decrease on fixture trees") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      const auto d = testing::fixture_binary({400, seed, FeatureGroup::Academic, 1.0});
      const auto t = std::get<DecisionTree>(train_decision_tree(d, HyperParams{}).params);
      check_tree_shape(t, 5);
      const auto noise = testing::random_binary(300, 5, seed, true);
      check_tree_shape(std::get<DecisionTree>(train_decision_tree(noise, HyperParams{}).params), 5);
    }
    HyperParams hp;
    hp.forest_n_trees = 20;
    const auto d = testing::fixture_binary({300, 8, FeatureGroup::Socioeconomic, 1.0});
    const auto f = std::get<ForestModel>(train_random_forest(d, hp).params);
    for (const auto& t : f.trees) check_tree_shape(t, 1000);
  }

  TEST_CASE("depth-limited trees respect any limit") {
    const auto d = testing::random_binary(200, 4, 3);
    for (std::int32_t depth = 1; depth <= 4; ++depth) {
      HyperParams hp;
      hp.tree_max_depth = depth;
      CHECK(std::get<DecisionTree>(train_decision_tree(d, hp).params).depth() <= depth);
    }
  }

  TEST_CASE("strictly monotone transforms leave predictions unchanged") {
    // Training rows: every node sees the same partition, so predictions match.
    const auto d = testing::random_binary(250, 4, 17, true);
    const auto base = train_decision_tree(d, HyperParams{});
    const Eigen::VectorXd s0 = score(base, d.features);
    const std::vector<double (*)(double)> transforms = {
        [](double v) { return std::exp(v); },
        [](double v) { return v * v * v - 10.0; },
        [](double v) { return 3.0 * v + 1.0; },
        [](double v) { return std::atan(v); }};
    for (const auto f : transforms)
      for (Eigen::Index j = 0; j < d.cols(); ++j) {
        auto moved = d;
        moved.features.col(j) = d.features.col(j).unaryExpr(f);
        const auto m = train_decision_tree(moved, HyperParams{});
        CHECK(score(m, moved.features) == s0);
      }

    // Held-out rows on 0/1 columns: any split threshold sits between the
    // two values, so unseen rows are routed identically too.
    Rng rng(5, Stream::Fixture);
    Eigen::MatrixXd x(300, 5);
    Eigen::VectorXi y(300);
    for (Eigen::Index i = 0; i < 300; ++i) {
      for (Eigen::Index j = 0; j < 5; ++j) x(i, j) = static_cast<double>(rng.below(2));
      y(i) = (x(i, 0) + x(i, 1) + static_cast<double>(rng.below(2)) >= 2.0) ? 1 : 0;
    }
    const auto train = testing::make_binary(x.topRows(200), y.head(200));
    const Eigen::MatrixXd test = x.bottomRows(100);
    const Eigen::VectorXd held0 = score(train_decision_tree(train, HyperParams{}), test);
    for (Eigen::Index j = 0; j < 5; ++j) {
      auto moved = train;
      moved.features.col(j) = train.features.col(j).unaryExpr([](double v) { return std::exp(3.0 * v) - 7.0; });
      Eigen::MatrixXd moved_test = test;
      moved_test.col(j) = test.col(j).unaryExpr([](double v) { return std::exp(3.0 * v) - 7.0; });
      CHECK(score(train_decision_tree(moved, HyperParams{}), moved_test) == held0);
    }
  }

  TEST_CASE("decision tree scores are fractions") {
    const auto d = testing::fixture_binary({300, 2, FeatureGroup::Demographic, 1.0});
    const Eigen::VectorXd s = score(train_decision_tree(d, HyperParams{}), d.features);
    CHECK((s.array() >= 0.0).all());
    CHECK((s.array() <= 1.0).all());
  }

  TEST_CASE("forest on an all-negative set scores zero") {
    const auto d = testing::make_binary(Eigen::MatrixXd::Random(30, 4), Eigen::VectorXi::Zero(30));
    HyperParams hp;
    hp.forest_n_trees = 10;
    const Eigen::VectorXd s = score(train_random_forest(d, hp), Eigen::MatrixXd::Random(20, 4));
    CHECK((s.array() == 0.0).all());
  }

  TEST_CASE("forest is bit-identical across thread counts") {
    const auto d = testing::fixture_binary({400, 6, FeatureGroup::Academic, 1.0});
    HyperParams one;
    one.forest_n_trees = 40;
    HyperParams eight = one;
    eight.threads = 8;
    const auto a = train_random_forest(d, one);
    const auto b = train_random_forest(d, eight);
    const auto& fa = std::get<ForestModel>(a.params);
    const auto& fb = std::get<ForestModel>(b.params);
    REQUIRE(fa.trees.size() == fb.trees.size());
    CHECK(fa.tree_seeds == fb.tree_seeds);
    for (std::size_t t = 0; t < fa.trees.size(); ++t) CHECK(same_tree(fa.trees[t], fb.trees[t]));
    const Eigen::VectorXd sa = score(a, d.features);
    const Eigen::VectorXd sb = score(b, d.features);
    CHECK(std::memcmp(sa.data(), sb.data(), sizeof(double) * static_cast<std::size_t>(sa.size())) == 0);
  }

  TEST_CASE("tree seeds follow seed xor index") {
    const auto d = testing::random_binary(50, 3, 2);
    HyperParams hp;
    hp.forest_n_trees = 5;
    hp.seed = 1000;
    const auto f = std::get<ForestModel>(train_random_forest(d, hp).params);
    for (std::uint64_t t = 0; t < 5; ++t) CHECK(f.tree_seeds[t] == (1000 ^ t));
  }

  TEST_CASE("forest with one perfectly predictive column reaches AUC 1 on held-out rows") {
    Rng rng(21, Stream::Fixture);
    const Eigen::Index n = 400, p = 6;
    Eigen::MatrixXd x(n, p);
    Eigen::VectorXi y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      y(i) = static_cast<int>(rng.below(2));
      for (Eigen::Index j = 1; j < p; ++j) x(i, j) = rng.normal();
      x(i, 0) = (y(i) == 1 ? 1.0 : -1.0) + 0.5 * rng.uniform() - 0.25;  // one threshold at 0 separates
    }
    const auto all = testing::make_binary(x, y);
    const auto s = split(static_cast<std::size_t>(n), 0.2, 42);
    const auto train = select_rows(all, s.train_rows);
    const auto test = select_rows(all, s.test_rows);
    const auto m = train_random_forest(train, HyperParams{});
    CHECK(auc(score(m, test.features), test.labels) == 1.0);
  }

  TEST_CASE("one tree without bootstrap or subsampling equals the decision tree") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto d = testing::fixture_binary({300, seed, FeatureGroup::Academic, 1.2});
      HyperParams hp;
      hp.forest_n_trees = 1;
      hp.forest_bootstrap = false;
      hp.forest_feature_subsample = static_cast<std::size_t>(d.cols());
      hp.forest_max_depth = 5;
      const auto forest = std::get<ForestModel>(train_random_forest(d, hp).params);
      const auto tree = std::get<DecisionTree>(train_decision_tree(d, hp).params);
      CHECK(same_tree(forest.trees.front(), tree));
    }
  }

  TEST_CASE("forest score is the mean of its trees") {
    const auto d = testing::fixture_binary({200, 4, FeatureGroup::Academic, 1.0});
    HyperParams hp;
    hp.forest_n_trees = 7;
    const auto m = train_random_forest(d, hp);
    const auto& f = std::get<ForestModel>(m.params);
    const Eigen::VectorXd s = score(m, d.features);
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
      double sum = 0.0;
      for (const auto& t : f.trees) sum += t.score(d.features.row(i));
      CHECK(s(i) == sum / 7.0);
    }
  }

  TEST_CASE("subsampling without a generator is rejected") {
    const auto d = testing::random_binary(20, 4, 1);
    const auto rows = all_rows(20);
    CHECK_THROWS_AS(grow_tree(d.features, d.labels, rows, TreeGrowth{std::nullopt, 1, 2}), InvalidArgumentError);
  }
}
