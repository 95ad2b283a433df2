#pragma once

#include "dropout/eda.hpp"
#include "dropout/experiments.hpp"
#include "dropout/metrics.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dropout {

inline constexpr std::string_view kToolName = "dropout";
inline constexpr std::string_view kToolVersion = "1.0.0";
/// Bumped whenever docs/report.schema.json changes incompatibly.
inline constexpr int kReportSchemaVersion = 1;

using Json = nlohmann::ordered_json;

Json to_json(const HyperParams& hp);
Json to_json(const RocReport& report);
Json to_json(const AblationReport& report);
Json to_json(const std::vector<GroupInfluence>& influence);
Json to_json(const ImportanceReport& importance);

/// Shared envelope: schema version, tool, command and provenance.
Json report_envelope(std::string_view command, const std::string& data_path, const std::string& manifest_version,
                     std::span<const std::uint64_t> seeds, double test_fraction, const HyperParams& hp);

/// Grid layout: one row per model, then Average and STDV rows; columns
/// baseline then each exclusion. Numbers are written in shortest round-trip
/// form, so parse_ablation_csv recovers them exactly.
void write_ablation_csv(std::ostream& out, const AblationReport& report);

struct AblationGrid {
  std::vector<std::string> row_labels;     // model labels, "Average", "STDV"
  std::vector<std::string> column_labels;  // "baseline", "excl_academic", ...
  Eigen::MatrixXd values;
};
AblationGrid parse_ablation_csv(std::istream& in);

/// Rows of threshold,fpr,tpr. The leading +inf threshold is written "inf".
void write_roc_csv(std::ostream& out, const RocCurve& curve);

/// All curves in one chart with the chance diagonal and a legend giving
/// each AUC to three decimals. Output depends only on the input.
std::string render_roc_svg(std::span<const RocReport> reports, std::string_view title = {});
void emit_roc_svg(std::span<const RocReport> reports, const std::filesystem::path& path,
                  std::string_view title = {});

void write_class_distribution_csv(std::ostream& out, const ClassCounts& counts);
void write_gender_csv(std::ostream& out, const GenderCounts& counts);
void write_category_rates_csv(std::ostream& out, const CategoryRateTable& table);
void write_correlation_csv(std::ostream& out, const CorrelationMatrix& matrix);

struct FixtureSpec {
  std::size_t n_rows = 1000;
  std::uint64_t seed = 42;
  std::optional<FeatureGroup> planted_group;
  double signal_strength = 0.0;
};

struct FixtureFiles {
  std::string csv;       // ';'-delimited, default 34-column schema plus Target
  std::string manifest;  // manifest text for the same columns
};

/// Synthetic records with the default schema. Binary-coded columns
/// (Gender, Debtor, ...) are fair coin flips; the rest are standard normal
/// draws rounded to two decimals. Each row is Enrolled with probability 0.1;
/// otherwise it is Dropout when
///   signal * sum(planted contributions) / sqrt(#planted) + N(0, 1) > 0,
/// where a planted column contributes its value (binary columns 2b - 1).
/// Without a planted group, labels are pure noise.
FixtureFiles generate_fixture(const FixtureSpec& spec);

/// Writes fixture.csv and fixture_manifest.tsv into `dir`.
void write_fixture(const FixtureSpec& spec, const std::filesystem::path& dir);

}  // namespace dropout
