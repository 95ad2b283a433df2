#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dropout {

enum class FeatureGroup { Demographic, Socioeconomic, Macroeconomic, Academic };

/// Alphabetical by tag. This is the column order of ablation reports.
inline constexpr std::array<FeatureGroup, 4> kFeatureGroups = {
    FeatureGroup::Academic, FeatureGroup::Demographic, FeatureGroup::Macroeconomic,
    FeatureGroup::Socioeconomic};

std::string_view to_string(FeatureGroup group) noexcept;
std::optional<FeatureGroup> parse_feature_group(std::string_view tag) noexcept;

enum class Outcome { Dropout, Graduate, Enrolled };

std::string_view to_string(Outcome outcome) noexcept;
std::optional<Outcome> parse_outcome(std::string_view text) noexcept;

struct ManifestEntry {
  std::string column;
  FeatureGroup group;
};

/// Assignment of feature columns to groups. Column names are unique.
struct GroupManifest {
  std::vector<ManifestEntry> entries;
  std::string version_tag;

  std::size_t size() const noexcept { return entries.size(); }
  std::size_t count(FeatureGroup group) const noexcept;
};

/// The 34-column grouping shipped with the project (also in
/// data/manifest_default.tsv). Column names use the spelling of the public
/// release, including its "Nacionality" header.
const GroupManifest& default_manifest();

/// Manifest text: one `column<TAB>group` per line, `#` starts a comment
/// line, blank lines are skipped. A comment of the form `# version: TAG`
/// sets the version tag; otherwise `fallback_tag` is used.
GroupManifest parse_manifest(std::istream& in, std::string fallback_tag);
GroupManifest load_manifest(const std::filesystem::path& path);

using FeatureMatrix = Eigen::MatrixXd;
using LabelVector = Eigen::VectorXi;

/// Feature table with the three-valued outcome. Columns follow manifest order.
struct Dataset {
  FeatureMatrix features;
  std::vector<std::string> column_names;
  std::vector<FeatureGroup> column_groups;
  std::vector<Outcome> outcomes;
  std::string manifest_version;

  Eigen::Index rows() const noexcept { return features.rows(); }
  Eigen::Index cols() const noexcept { return features.cols(); }
};

/// Dropout (1) vs Graduate (0); Enrolled rows removed.
struct BinaryDataset {
  FeatureMatrix features;
  std::vector<std::string> column_names;
  std::vector<FeatureGroup> column_groups;
  LabelVector labels;
  std::string manifest_version;

  Eigen::Index rows() const noexcept { return features.rows(); }
  Eigen::Index cols() const noexcept { return features.cols(); }
};

inline constexpr std::string_view kTargetColumn = "Target";

/// Reads a delimited file with a header row. Header cells and data cells are
/// trimmed of surrounding whitespace; double-quoted cells are unquoted.
/// Columns not named in the manifest (other than the target) are ignored.
Dataset parse_dataset(std::istream& in, const GroupManifest& manifest, char delimiter = ';');
Dataset load_dataset(const std::filesystem::path& csv_path, const GroupManifest& manifest,
                     char delimiter = ';');

/// Writes `dataset` in the input format, numbers in shortest round-trip form.
void write_dataset_csv(std::ostream& out, const Dataset& dataset, char delimiter = ';');

BinaryDataset to_binary(const Dataset& dataset);

std::size_t count_outcome(const Dataset& dataset, Outcome outcome) noexcept;

/// Index of the named column, or nullopt.
std::optional<Eigen::Index> find_column(const std::vector<std::string>& names,
                                        std::string_view name) noexcept;

/// Shortest decimal text that parses back to exactly `value`.
std::string format_number(double value);

}  // namespace dropout
