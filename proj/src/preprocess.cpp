#include "dropout/preprocess.hpp"

#include "dropout/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dropout {

SplitIndices split(std::size_t n_rows, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw InvalidFractionError("test fraction must lie in (0, 1), got " +
                               std::to_string(test_fraction));
  if (n_rows < 2) throw InvalidArgumentError("split needs at least two rows");

  std::vector<Eigen::Index> order(n_rows);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng(seed, Stream::Split);
  rng.shuffle(std::span<Eigen::Index>(order));

  const auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(n_rows)));
  SplitIndices out;
  out.seed = seed;
  out.test_fraction = test_fraction;
  out.test_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  out.train_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  std::sort(out.test_rows.begin(), out.test_rows.end());
  std::sort(out.train_rows.begin(), out.train_rows.end());
  return out;
}

BinaryDataset select_rows(const BinaryDataset& data, std::span<const Eigen::Index> rows) {
  const std::vector<Eigen::Index> idx(rows.begin(), rows.end());
  BinaryDataset out;
  out.features = data.features(idx, Eigen::all);
  out.labels = data.labels(idx);
  out.column_names = data.column_names;
  out.column_groups = data.column_groups;
  out.manifest_version = data.manifest_version;
  return out;
}

BinaryDataset exclude_group(const BinaryDataset& data, FeatureGroup group) {
  std::vector<Eigen::Index> keep;
  for (std::size_t j = 0; j < data.column_groups.size(); ++j)
    if (data.column_groups[j] != group) keep.push_back(static_cast<Eigen::Index>(j));
  if (keep.size() == data.column_groups.size())
    throw UnknownGroupError("no column belongs to group '" + std::string(to_string(group)) + "'");

  BinaryDataset out;
  out.features = data.features(Eigen::all, keep);
  out.labels = data.labels;
  for (const auto j : keep) {
    out.column_names.push_back(data.column_names[static_cast<std::size_t>(j)]);
    out.column_groups.push_back(data.column_groups[static_cast<std::size_t>(j)]);
  }
  out.manifest_version = data.manifest_version;
  return out;
}

}  // namespace dropout
