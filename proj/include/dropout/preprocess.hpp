#pragma once

#include "dropout/error.hpp"
#include "dropout/schema.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dropout {

using RowIndices = std::vector<Eigen::Index>;

/// Disjoint train/test partition of `0..n-1`. Both lists are ascending.
struct SplitIndices {
  RowIndices train_rows;
  RowIndices test_rows;
  std::uint64_t seed = 0;
  double test_fraction = 0.0;
};

/// Simple random split: a Fisher-Yates permutation from `Rng(seed,
/// Stream::Split)`; the first round(test_fraction * n) permuted rows (rounding
/// half away from zero) form the test set.
SplitIndices split(std::size_t n_rows, double test_fraction, std::uint64_t seed);

/// Per-column affine scaling fitted on training rows. The standard deviation
/// uses the population convention (divide by n). A column whose training
/// values are all identical is flagged constant, stores stddev 1, and maps
/// to 0.
template <typename Scalar>
struct BasicStandardizer {
  using RowArray = Eigen::Array<Scalar, 1, Eigen::Dynamic>;

  RowArray mean;
  RowArray stddev;
  std::vector<bool> constant;

  Eigen::Index cols() const noexcept { return mean.size(); }
};

using Standardizer = BasicStandardizer<double>;

template <typename Derived>
BasicStandardizer<typename Derived::Scalar> fit_standardizer(const Eigen::MatrixBase<Derived>& matrix,
                                                             std::span<const Eigen::Index> train_rows) {
  using Scalar = typename Derived::Scalar;
  if (train_rows.empty()) throw InvalidArgumentError("fit_standardizer: no training rows");
  const Eigen::Index p = matrix.cols();
  const auto n = static_cast<Scalar>(train_rows.size());

  BasicStandardizer<Scalar> s;
  s.mean = BasicStandardizer<Scalar>::RowArray::Zero(p);
  s.stddev = BasicStandardizer<Scalar>::RowArray::Ones(p);
  s.constant.assign(static_cast<std::size_t>(p), true);

  for (Eigen::Index j = 0; j < p; ++j) {
    const Scalar first = matrix(train_rows.front(), j);
    Scalar sum = 0;
    for (const auto r : train_rows) {
      sum += matrix(r, j);
      if (matrix(r, j) != first) s.constant[static_cast<std::size_t>(j)] = false;
    }
    if (s.constant[static_cast<std::size_t>(j)]) {
      s.mean(j) = first;
      continue;
    }
    const Scalar mean = sum / n;
    Scalar ss = 0;
    for (const auto r : train_rows) {
      const Scalar d = matrix(r, j) - mean;
      ss += d * d;
    }
    s.mean(j) = mean;
    s.stddev(j) = std::sqrt(ss / n);
  }
  return s;
}

/// Fits on every row.
template <typename Derived>
BasicStandardizer<typename Derived::Scalar> fit_standardizer(const Eigen::MatrixBase<Derived>& matrix) {
  std::vector<Eigen::Index> all(static_cast<std::size_t>(matrix.rows()));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<Eigen::Index>(i);
  return fit_standardizer(matrix, std::span<const Eigen::Index>(all));
}

template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> apply_standardizer(
    const BasicStandardizer<Scalar>& s, const Eigen::MatrixBase<Derived>& matrix) {
  if (matrix.cols() != s.cols())
    throw ColumnMismatchError("standardizer fitted on " + std::to_string(s.cols()) +
                              " columns, got " + std::to_string(matrix.cols()));
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out =
      ((matrix.array().rowwise() - s.mean).rowwise() / s.stddev).matrix();
  for (Eigen::Index j = 0; j < s.cols(); ++j)
    if (s.constant[static_cast<std::size_t>(j)]) out.col(j).setZero();
  return out;
}

/// Row subset, in the order given.
BinaryDataset select_rows(const BinaryDataset& data, std::span<const Eigen::Index> rows);

/// Drops every column tagged `group`; remaining columns keep their order.
/// Throws UnknownGroupError when no column carries the tag.
BinaryDataset exclude_group(const BinaryDataset& data, FeatureGroup group);

}  // namespace dropout
