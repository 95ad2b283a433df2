#include "dropout/schema.hpp"

#include "dropout/error.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace dropout {

namespace {

constexpr std::string_view kDefaultManifestText =
    "# version: default-34\n"
    "Marital status\tdemographic\n"
    "Application mode\tacademic\n"
    "Application order\tacademic\n"
    "Course\tacademic\n"
    "Daytime/evening attendance\tacademic\n"
    "Previous qualification\tacademic\n"
    "Nacionality\tdemographic\n"
    "Mother's qualification\tsocioeconomic\n"
    "Father's qualification\tsocioeconomic\n"
    "Mother's occupation\tsocioeconomic\n"
    "Father's occupation\tsocioeconomic\n"
    "Displaced\tdemographic\n"
    "Educational special needs\tsocioeconomic\n"
    "Debtor\tsocioeconomic\n"
    "Tuition fees up to date\tsocioeconomic\n"
    "Gender\tdemographic\n"
    "Scholarship holder\tsocioeconomic\n"
    "Age at enrollment\tdemographic\n"
    "International\tdemographic\n"
    "Curricular units 1st sem (credited)\tacademic\n"
    "Curricular units 1st sem (enrolled)\tacademic\n"
    "Curricular units 1st sem (evaluations)\tacademic\n"
    "Curricular units 1st sem (approved)\tacademic\n"
    "Curricular units 1st sem (grade)\tacademic\n"
    "Curricular units 1st sem (without evaluations)\tacademic\n"
    "Curricular units 2nd sem (credited)\tacademic\n"
    "Curricular units 2nd sem (enrolled)\tacademic\n"
    "Curricular units 2nd sem (evaluations)\tacademic\n"
    "Curricular units 2nd sem (approved)\tacademic\n"
    "Curricular units 2nd sem (grade)\tacademic\n"
    "Curricular units 2nd sem (without evaluations)\tacademic\n"
    "Unemployment rate\tmacroeconomic\n"
    "Inflation rate\tmacroeconomic\n"
    "GDP\tmacroeconomic\n";

std::string_view trim(std::string_view s) noexcept {
  constexpr std::string_view ws = " \t\r\n\v\f";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

// Splits one record. Supports double-quoted cells with "" escapes; the
// returned cells are trimmed and unquoted.
std::vector<std::string> split_record(std::string_view line, char delimiter) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"' && trim(cell).empty()) {
      cell.clear();
      quoted = true;
    } else if (c == delimiter) {
      cells.emplace_back(trim(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  cells.emplace_back(trim(cell));
  return cells;
}

std::optional<double> parse_double(std::string_view text) noexcept {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

std::string quote_if_needed(const std::string& cell, char delimiter) {
  if (cell.find(delimiter) == std::string::npos && cell.find('"') == std::string::npos)
    return cell;
  std::string quoted = "\"";
  for (char c : cell) {
    if (c == '"') quoted.push_back('"');
    quoted.push_back(c);
  }
  quoted.push_back('"');
  return quoted;
}

}  // namespace

std::string_view to_string(FeatureGroup group) noexcept {
  switch (group) {
    case FeatureGroup::Demographic: return "demographic";
    case FeatureGroup::Socioeconomic: return "socioeconomic";
    case FeatureGroup::Macroeconomic: return "macroeconomic";
    case FeatureGroup::Academic: return "academic";
  }
  return "unknown";
}

std::optional<FeatureGroup> parse_feature_group(std::string_view tag) noexcept {
  for (const auto group : kFeatureGroups)
    if (to_string(group) == tag) return group;
  return std::nullopt;
}

std::string_view to_string(Outcome outcome) noexcept {
  switch (outcome) {
    case Outcome::Dropout: return "Dropout";
    case Outcome::Graduate: return "Graduate";
    case Outcome::Enrolled: return "Enrolled";
  }
  return "unknown";
}

std::optional<Outcome> parse_outcome(std::string_view text) noexcept {
  if (text == "Dropout") return Outcome::Dropout;
  if (text == "Graduate") return Outcome::Graduate;
  if (text == "Enrolled") return Outcome::Enrolled;
  return std::nullopt;
}

std::size_t GroupManifest::count(FeatureGroup group) const noexcept {
  return static_cast<std::size_t>(std::count_if(
      entries.begin(), entries.end(), [group](const auto& e) { return e.group == group; }));
}

GroupManifest parse_manifest(std::istream& in, std::string fallback_tag) {
  GroupManifest manifest;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto content = trim(line);
    if (content.empty()) continue;
    if (content.front() == '#') {
      auto body = trim(content.substr(1));
      constexpr std::string_view key = "version:";
      if (body.substr(0, key.size()) == key) manifest.version_tag = trim(body.substr(key.size()));
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw ManifestParseError("manifest line " + std::to_string(line_no) +
                               ": expected column<TAB>group");
    const auto column = trim(std::string_view(line).substr(0, tab));
    const auto tag = trim(std::string_view(line).substr(tab + 1));
    if (column.empty())
      throw ManifestParseError("manifest line " + std::to_string(line_no) + ": empty column name");
    const auto group = parse_feature_group(tag);
    if (!group)
      throw ManifestParseError("manifest line " + std::to_string(line_no) + ": unknown group '" +
                               std::string(tag) + "'");
    if (!seen.emplace(column).second)
      throw DuplicateColumnError("manifest lists column '" + std::string(column) + "' twice");
    manifest.entries.push_back({std::string(column), *group});
  }
  if (manifest.entries.empty()) throw ManifestParseError("manifest has no entries");
  if (manifest.version_tag.empty()) manifest.version_tag = std::move(fallback_tag);
  return manifest;
}

GroupManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  return parse_manifest(in, path.stem().string());
}

const GroupManifest& default_manifest() {
  static const GroupManifest manifest = [] {
    std::istringstream in{std::string(kDefaultManifestText)};
    return parse_manifest(in, "default-34");
  }();
  return manifest;
}

Dataset parse_dataset(std::istream& in, const GroupManifest& manifest, char delimiter) {
  std::string line;
  if (!std::getline(in, line)) throw MissingColumnError(manifest.entries.front().column);
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_record(line, delimiter);

  std::unordered_map<std::string_view, std::size_t> header_index;
  for (std::size_t i = 0; i < header.size(); ++i) header_index.emplace(header[i], i);

  std::vector<std::size_t> source_of;  // manifest position -> file column
  source_of.reserve(manifest.size());
  for (const auto& entry : manifest.entries) {
    const auto it = header_index.find(entry.column);
    if (it == header_index.end()) throw MissingColumnError(entry.column);
    source_of.push_back(it->second);
  }
  const auto target_it = header_index.find(kTargetColumn);
  if (target_it == header_index.end()) throw MissingColumnError(std::string(kTargetColumn));
  const std::size_t target_col = target_it->second;

  std::vector<double> values;  // row-major staging
  std::vector<Outcome> outcomes;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split_record(line, delimiter);
    if (cells.size() != header.size())
      throw CellParseError(row, "<record>",
                           std::to_string(cells.size()) + " cells, header has " +
                               std::to_string(header.size()));
    for (std::size_t j = 0; j < source_of.size(); ++j) {
      const auto& cell = cells[source_of[j]];
      if (cell.empty())
        throw MissingValueError("missing value at data row " + std::to_string(row) +
                                ", column '" + manifest.entries[j].column + "'");
      const auto value = parse_double(cell);
      if (!value) throw CellParseError(row, manifest.entries[j].column, cell);
      values.push_back(*value);
    }
    const auto& target = cells[target_col];
    if (target.empty())
      throw MissingValueError("missing value at data row " + std::to_string(row) + ", column '" +
                              std::string(kTargetColumn) + "'");
    const auto outcome = parse_outcome(target);
    if (!outcome) throw CellParseError(row, std::string(kTargetColumn), target);
    outcomes.push_back(*outcome);
  }

  Dataset dataset;
  const auto n = static_cast<Eigen::Index>(outcomes.size());
  const auto p = static_cast<Eigen::Index>(manifest.size());
  dataset.features = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                    Eigen::RowMajor>>(values.data(), n, p);
  dataset.outcomes = std::move(outcomes);
  for (const auto& entry : manifest.entries) {
    dataset.column_names.push_back(entry.column);
    dataset.column_groups.push_back(entry.group);
  }
  dataset.manifest_version = manifest.version_tag;
  return dataset;
}

Dataset load_dataset(const std::filesystem::path& csv_path, const GroupManifest& manifest,
                     char delimiter) {
  std::ifstream in(csv_path);
  if (!in) throw IoError("cannot open dataset " + csv_path.string());
  return parse_dataset(in, manifest, delimiter);
}

void write_dataset_csv(std::ostream& out, const Dataset& dataset, char delimiter) {
  for (const auto& name : dataset.column_names) out << quote_if_needed(name, delimiter) << delimiter;
  out << kTargetColumn << '\n';
  for (Eigen::Index i = 0; i < dataset.rows(); ++i) {
    for (Eigen::Index j = 0; j < dataset.cols(); ++j)
      out << format_number(dataset.features(i, j)) << delimiter;
    out << to_string(dataset.outcomes[static_cast<std::size_t>(i)]) << '\n';
  }
}

BinaryDataset to_binary(const Dataset& dataset) {
  if (dataset.rows() == 0) throw EmptyResultError("dataset is empty");
  std::vector<Eigen::Index> keep;
  for (std::size_t i = 0; i < dataset.outcomes.size(); ++i)
    if (dataset.outcomes[i] != Outcome::Enrolled) keep.push_back(static_cast<Eigen::Index>(i));
  if (keep.empty()) throw EmptyResultError("no Dropout or Graduate rows remain");

  BinaryDataset binary;
  binary.features = dataset.features(keep, Eigen::all);
  binary.labels.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r)
    binary.labels(static_cast<Eigen::Index>(r)) =
        dataset.outcomes[static_cast<std::size_t>(keep[r])] == Outcome::Dropout ? 1 : 0;
  binary.column_names = dataset.column_names;
  binary.column_groups = dataset.column_groups;
  binary.manifest_version = dataset.manifest_version;
  return binary;
}

std::size_t count_outcome(const Dataset& dataset, Outcome outcome) noexcept {
  return static_cast<std::size_t>(
      std::count(dataset.outcomes.begin(), dataset.outcomes.end(), outcome));
}

std::optional<Eigen::Index> find_column(const std::vector<std::string>& names,
                                        std::string_view name) noexcept {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<Eigen::Index>(it - names.begin());
}

std::string format_number(double value) {
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, ptr);
}

}  // namespace dropout
