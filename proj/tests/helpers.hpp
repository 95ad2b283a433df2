#pragma once

#include "dropout/report.hpp"
#include "dropout/rng.hpp"
#include "dropout/schema.hpp"

#include <Eigen/Dense>

#include <cstdlib>
#include <unistd.h>
#include <filesystem>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

namespace testing {

using namespace dropout;

// Columns f0, f1, ... all tagged academic.
inline BinaryDataset make_binary(const Eigen::MatrixXd& x, const Eigen::VectorXi& y) {
  BinaryDataset d;
  d.features = x;
  d.labels = y;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    d.column_names.push_back("f" + std::to_string(j));
    d.column_groups.push_back(FeatureGroup::Academic);
  }
  d.manifest_version = "test";
  return d;
}

inline Eigen::VectorXi labels(std::initializer_list<int> values) {
  Eigen::VectorXi y(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (const int v : values) y(i++) = v;
  return y;
}

inline Dataset fixture_dataset(const FixtureSpec& spec) {
  const auto files = generate_fixture(spec);
  std::istringstream m(files.manifest);
  const auto manifest = parse_manifest(m, "fixture");
  std::istringstream c(files.csv);
  return parse_dataset(c, manifest, ';');
}

inline BinaryDataset fixture_binary(const FixtureSpec& spec) { return to_binary(fixture_dataset(spec)); }

// Random features with labels drawn independently of them.
inline BinaryDataset random_binary(Eigen::Index n, Eigen::Index p, std::uint64_t seed, bool integer_grid = false) {
  Rng rng(seed, Stream::Fixture);
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXi y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j)
      x(i, j) = integer_grid ? static_cast<double>(rng.below(4)) : rng.normal();
    y(i) = static_cast<int>(rng.below(2));
  }
  y(0) = 0;
  y(1) = 1;
  return make_binary(x, y);
}

// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& name) {
    path = std::filesystem::temp_directory_path() / ("dropout_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

}  // namespace testing
