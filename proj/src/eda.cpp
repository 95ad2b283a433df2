#include "dropout/eda.hpp"

#include "dropout/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace dropout {

namespace {

Eigen::Index require_column(const BinaryDataset& data, std::string_view name) {
  const auto col = find_column(data.column_names, name);
  if (!col) throw UnknownFeatureError("unknown feature '" + std::string(name) + "'");
  return *col;
}

}  // namespace

ClassCounts class_distribution(const Dataset& dataset) {
  ClassCounts counts;
  for (const auto o : dataset.outcomes) {
    switch (o) {
      case Outcome::Dropout: ++counts.dropout; break;
      case Outcome::Graduate: ++counts.graduate; break;
      case Outcome::Enrolled: ++counts.enrolled; break;
    }
  }
  return counts;
}

CategoryRateTable rate_by_category(const BinaryDataset& data, std::string_view feature_name) {
  const auto col = require_column(data, feature_name);
  std::map<double, std::pair<std::size_t, std::size_t>> tally;  // code -> (n, dropouts)
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    auto& [n, dropouts] = tally[data.features(i, col)];
    ++n;
    dropouts += static_cast<std::size_t>(data.labels(i) == 1);
  }
  CategoryRateTable table;
  table.feature_name = std::string(feature_name);
  for (const auto& [code, counts] : tally) {
    const auto [n, dropouts] = counts;
    const double rate = static_cast<double>(dropouts) / static_cast<double>(n);
    table.rows.push_back({code, n, rate, static_cast<double>(n - dropouts) / static_cast<double>(n)});
  }
  return table;
}

GenderCounts gender_distribution(const BinaryDataset& data) {
  const auto col = require_column(data, kGenderColumn);
  GenderCounts counts;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    const double code = data.features(i, col);
    const bool dropout = data.labels(i) == 1;
    if (code == 1.0)
      ++(dropout ? counts.male_dropout : counts.male_graduate);
    else if (code == 0.0)
      ++(dropout ? counts.female_dropout : counts.female_graduate);
    else
      throw InvalidArgumentError("Gender code must be 0 or 1");
  }
  return counts;
}

CorrelationMatrix correlation_matrix(const BinaryDataset& data) {
  if (data.rows() < 2) throw InvalidArgumentError("correlation needs at least two rows");
  const Eigen::Index p = data.cols();
  const Eigen::MatrixXd centered = data.features.rowwise() - data.features.colwise().mean();

  CorrelationMatrix out;
  out.column_names = data.column_names;
  out.constant.resize(static_cast<std::size_t>(p));
  Eigen::VectorXd norms(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const auto col = data.features.col(j);
    out.constant[static_cast<std::size_t>(j)] = (col.array() == col(0)).all();
    norms(j) = centered.col(j).norm();
  }

  out.r = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index a = 0; a < p; ++a) {
    if (out.constant[static_cast<std::size_t>(a)]) continue;
    out.r(a, a) = 1.0;
    for (Eigen::Index b = a + 1; b < p; ++b) {
      if (out.constant[static_cast<std::size_t>(b)]) continue;
      const double r = centered.col(a).dot(centered.col(b)) / (norms(a) * norms(b));
      out.r(a, b) = out.r(b, a) = std::clamp(r, -1.0, 1.0);
    }
  }
  return out;
}

}  // namespace dropout
