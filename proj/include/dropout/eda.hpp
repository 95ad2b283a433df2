#pragma once

#include "dropout/schema.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace dropout {

struct ClassCounts {
  std::size_t dropout = 0;
  std::size_t graduate = 0;
  std::size_t enrolled = 0;

  std::size_t total() const noexcept { return dropout + graduate + enrolled; }
  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

ClassCounts class_distribution(const Dataset& dataset);

struct CategoryRate {
  double code;
  std::size_t n;
  double dropout_rate;
  double graduate_rate;
};

/// Outcome rates per distinct value of one feature, codes ascending.
struct CategoryRateTable {
  std::string feature_name;
  std::vector<CategoryRate> rows;
};

/// Throws UnknownFeatureError if the column is absent.
CategoryRateTable rate_by_category(const BinaryDataset& data, std::string_view feature_name);

/// Counts per (gender, label). The source codes Gender as 1 = male, 0 = female.
struct GenderCounts {
  std::size_t female_dropout = 0;
  std::size_t female_graduate = 0;
  std::size_t male_dropout = 0;
  std::size_t male_graduate = 0;

  std::size_t female() const noexcept { return female_dropout + female_graduate; }
  std::size_t male() const noexcept { return male_dropout + male_graduate; }
};

inline constexpr std::string_view kGenderColumn = "Gender";

GenderCounts gender_distribution(const BinaryDataset& data);

/// Pearson r over raw (integer-coded) columns. A constant column has r = 0
/// against every column, including itself, and is flagged.
struct CorrelationMatrix {
  Eigen::MatrixXd r;
  std::vector<std::string> column_names;
  std::vector<bool> constant;
};

CorrelationMatrix correlation_matrix(const BinaryDataset& data);

}  // namespace dropout
