#include "dropout/report.hpp"

#include "dropout/error.hpp"
#include "dropout/rng.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace dropout {

namespace {

Json optional_group(const std::optional<FeatureGroup>& g) {
  return g ? Json(std::string(to_string(*g))) : Json(nullptr);
}

std::string column_label(const std::optional<FeatureGroup>& g) {
  return g ? "excl_" + std::string(to_string(*g)) : "baseline";
}

std::string fixed(double value, int decimals) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.*f", decimals, value);
  return buffer;
}

std::string xml_escape(std::string_view text) {
  std::string out;
  for (const char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string csv_cell(std::string_view text) {
  if (text.find_first_of(",\"\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (const char c : text) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cells.back().push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cells.back().push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.emplace_back();
    } else if (c != '\r') {
      cells.back().push_back(c);
    }
  }
  return cells;
}

}  // namespace

Json to_json(const HyperParams& hp) {
  Json j;
  j["tree_max_depth"] = hp.tree_max_depth;
  j["forest_n_trees"] = hp.forest_n_trees;
  j["forest_feature_subsample"] =
      hp.forest_feature_subsample ? Json(*hp.forest_feature_subsample) : Json("ceil_sqrt_p");
  j["forest_min_leaf"] = hp.forest_min_leaf;
  j["forest_max_depth"] = hp.forest_max_depth ? Json(*hp.forest_max_depth) : Json(nullptr);
  j["forest_bootstrap"] = hp.forest_bootstrap;
  j["svm_regularization_c"] = hp.svm_regularization_c;
  j["svm_epochs"] = hp.svm_epochs;
  j["knn_k"] = hp.knn_k;
  j["seed"] = hp.seed;
  return j;
}

Json to_json(const RocReport& report) {
  Json j;
  j["model"] = std::string(model_tag(report.model));
  j["excluded_group"] = optional_group(report.excluded_group);
  j["seed"] = report.seed;
  j["auc"] = report.auc;
  j["accuracy"] = report.accuracy;
  j["train_rows"] = report.train_rows;
  j["test_rows"] = report.test_rows;
  j["feature_count"] = report.feature_count;
  j["roc_points"] = report.curve.size();
  if (report.svm) {
    j["svm"] = {{"objective", report.svm->objective},
                {"initial_objective", report.svm->initial_objective},
                {"hinge_sum", report.svm->hinge_sum},
                {"epochs", report.svm->epochs},
                {"best_epoch", report.svm->best_epoch}};
  }
  return j;
}

Json to_json(const AblationReport& report) {
  Json j;
  Json columns = Json::array();
  for (const auto& c : report.columns) columns.push_back(column_label(c));
  j["columns"] = columns;
  Json rows = Json::array();
  for (std::size_t m = 0; m < report.models.size(); ++m) {
    Json row;
    row["model"] = std::string(model_tag(report.models[m]));
    Json means = Json::array(), sds = Json::array();
    for (Eigen::Index c = 0; c < report.mean_auc.cols(); ++c) {
      means.push_back(report.mean_auc(static_cast<Eigen::Index>(m), c));
      sds.push_back(report.seed_stddev(static_cast<Eigen::Index>(m), c));
    }
    row["mean_auc"] = means;
    row["seed_stddev"] = sds;
    rows.push_back(row);
  }
  j["rows"] = rows;
  j["column_mean"] = std::vector<double>(report.column_mean.data(), report.column_mean.data() + report.column_mean.size());
  j["column_model_stddev"] =
      std::vector<double>(report.column_stddev.data(), report.column_stddev.data() + report.column_stddev.size());
  j["manifest_version"] = report.manifest_version;
  j["seeds"] = report.seeds;
  return j;
}

Json to_json(const std::vector<GroupInfluence>& influence) {
  Json j = Json::array();
  for (const auto& g : influence) j.push_back({{"group", std::string(to_string(g.group))}, {"auc_drop", g.auc_drop}});
  return j;
}

Json to_json(const ImportanceReport& importance) {
  Json j = Json::array();
  for (const auto& f : importance) j.push_back({{"feature", f.feature}, {"importance", f.importance}});
  return j;
}

Json report_envelope(std::string_view command, const std::string& data_path, const std::string& manifest_version,
                     std::span<const std::uint64_t> seeds, double test_fraction, const HyperParams& hp) {
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["tool"] = {{"name", std::string(kToolName)}, {"version", std::string(kToolVersion)}};
  j["command"] = std::string(command);
  Json prov;
  prov["data"] = data_path;
  prov["manifest_version"] = manifest_version;
  prov["seeds"] = std::vector<std::uint64_t>(seeds.begin(), seeds.end());
  prov["test_fraction"] = test_fraction;
  prov["hyperparameters"] = to_json(hp);
  prov["preprocessing"] = {{"svc", "standardized"}, {"dt", "raw"}, {"rf", "raw"}, {"knn", "standardized"}};
  prov["auc_ties"] = "half";
  prov["positive_class"] = "Dropout";
  j["provenance"] = prov;
  return j;
}

void write_ablation_csv(std::ostream& out, const AblationReport& report) {
  out << "model";
  for (const auto& c : report.columns) out << ',' << column_label(c);
  out << '\n';
  const auto row = [&](std::string_view label, const auto& values) {
    out << label;
    for (Eigen::Index c = 0; c < values.size(); ++c) out << ',' << format_number(values(c));
    out << '\n';
  };
  for (std::size_t m = 0; m < report.models.size(); ++m)
    row(model_label(report.models[m]), report.mean_auc.row(static_cast<Eigen::Index>(m)));
  row("Average", report.column_mean);
  row("STDV", report.column_stddev);
}

AblationGrid parse_ablation_csv(std::istream& in) {
  AblationGrid grid;
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgumentError("empty ablation csv");
  auto header = split_csv_line(line);
  if (header.empty() || header.front() != "model") throw InvalidArgumentError("ablation csv: bad header");
  grid.column_labels.assign(header.begin() + 1, header.end());
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) throw InvalidArgumentError("ablation csv: ragged row");
    grid.row_labels.push_back(cells.front());
    std::vector<double> values;
    for (std::size_t i = 1; i < cells.size(); ++i) {
      double v = 0.0;
      const auto& s = cells[i];
      const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || ptr != s.data() + s.size())
        throw InvalidArgumentError("ablation csv: bad number '" + s + "'");
      values.push_back(v);
    }
    rows.push_back(std::move(values));
  }
  grid.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(grid.column_labels.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      grid.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return grid;
}

void write_roc_csv(std::ostream& out, const RocCurve& curve) {
  out << "threshold,fpr,tpr\n";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out << (std::isinf(curve.thresholds[i]) ? std::string("inf") : format_number(curve.thresholds[i])) << ','
        << format_number(curve.fpr[i]) << ',' << format_number(curve.tpr[i]) << '\n';
  }
}

std::string render_roc_svg(std::span<const RocReport> reports, std::string_view title) {
  if (reports.empty()) throw InvalidArgumentError("ROC plot needs at least one report");
  constexpr double size = 480.0, left = 70.0, top = 50.0;
  constexpr std::array<std::string_view, 8> palette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                       "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  const auto px = [&](double fpr) { return fixed(left + fpr * size, 2); };
  const auto py = [&](double tpr) { return fixed(top + (1.0 - tpr) * size, 2); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"600\" viewBox=\"0 0 640 600\" "
         "font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"640\" height=\"600\" fill=\"white\"/>\n";
  if (!title.empty())
    svg << "<text x=\"" << fixed(left + size / 2, 2) << "\" y=\"30\" text-anchor=\"middle\" font-size=\"15\">"
        << xml_escape(title) << "</text>\n";
  svg << "<rect x=\"" << fixed(left, 2) << "\" y=\"" << fixed(top, 2) << "\" width=\"" << fixed(size, 2)
      << "\" height=\"" << fixed(size, 2) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int tick = 0; tick <= 10; tick += 2) {
    const double v = tick / 10.0;
    svg << "<text x=\"" << px(v) << "\" y=\"" << fixed(top + size + 18, 2) << "\" text-anchor=\"middle\">"
        << fixed(v, 1) << "</text>\n";
    svg << "<text x=\"" << fixed(left - 8, 2) << "\" y=\"" << fixed(top + (1.0 - v) * size + 4, 2)
        << "\" text-anchor=\"end\">" << fixed(v, 1) << "</text>\n";
  }
  svg << "<text x=\"" << fixed(left + size / 2, 2) << "\" y=\"" << fixed(top + size + 40, 2)
      << "\" text-anchor=\"middle\">False positive rate</text>\n";
  svg << "<text transform=\"translate(20," << fixed(top + size / 2, 2)
      << ") rotate(-90)\" text-anchor=\"middle\">True positive rate</text>\n";
  svg << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1) << "\" y2=\"" << py(1)
      << "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";

  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& curve = reports[i].curve;
    svg << "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" << palette[i % palette.size()] << "\" points=\"";
    for (std::size_t k = 0; k < curve.size(); ++k)
      svg << (k ? " " : "") << px(curve.fpr[k]) << ',' << py(curve.tpr[k]);
    svg << "\"/>\n";
  }

  const double legend_x = left + size - 190.0;
  double legend_y = top + size - 20.0 * static_cast<double>(reports.size()) - 6.0;
  for (std::size_t i = 0; i < reports.size(); ++i, legend_y += 20.0) {
    const auto& r = reports[i];
    std::string label = std::string(model_label(r.model));
    if (r.excluded_group) label += " excl. " + std::string(to_string(*r.excluded_group));
    label += " (AUC = " + fixed(r.auc, 3) + ")";
    svg << "<line x1=\"" << fixed(legend_x, 2) << "\" y1=\"" << fixed(legend_y, 2) << "\" x2=\""
        << fixed(legend_x + 24, 2) << "\" y2=\"" << fixed(legend_y, 2) << "\" stroke-width=\"2\" stroke=\""
        << palette[i % palette.size()] << "\"/>\n";
    svg << "<text x=\"" << fixed(legend_x + 30, 2) << "\" y=\"" << fixed(legend_y + 4, 2) << "\">"
        << xml_escape(label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_roc_svg(std::span<const RocReport> reports, const std::filesystem::path& path, std::string_view title) {
  const auto text = render_roc_svg(reports, title);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

void write_class_distribution_csv(std::ostream& out, const ClassCounts& counts) {
  out << "outcome,count\n";
  out << "Dropout," << counts.dropout << "\nGraduate," << counts.graduate << "\nEnrolled," << counts.enrolled
      << '\n';
}

void write_gender_csv(std::ostream& out, const GenderCounts& counts) {
  out << "gender,dropout,graduate,total\n";
  out << "female," << counts.female_dropout << ',' << counts.female_graduate << ',' << counts.female() << '\n';
  out << "male," << counts.male_dropout << ',' << counts.male_graduate << ',' << counts.male() << '\n';
}

void write_category_rates_csv(std::ostream& out, const CategoryRateTable& table) {
  out << "feature,code,n,dropout_rate,graduate_rate\n";
  for (const auto& row : table.rows)
    out << csv_cell(table.feature_name) << ',' << format_number(row.code) << ',' << row.n << ','
        << format_number(row.dropout_rate) << ',' << format_number(row.graduate_rate) << '\n';
}

void write_correlation_csv(std::ostream& out, const CorrelationMatrix& matrix) {
  out << "feature";
  for (const auto& name : matrix.column_names) out << ',' << csv_cell(name);
  out << '\n';
  for (Eigen::Index i = 0; i < matrix.r.rows(); ++i) {
    out << csv_cell(matrix.column_names[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < matrix.r.cols(); ++j) out << ',' << format_number(matrix.r(i, j));
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Fixtures

namespace {

const std::set<std::string, std::less<>> kBinaryColumns = {
    "Daytime/evening attendance", "Displaced", "Educational special needs", "Debtor", "Tuition fees up to date",
    "Gender", "Scholarship holder", "International"};

}  // namespace

FixtureFiles generate_fixture(const FixtureSpec& spec) {
  if (spec.n_rows < 20) throw InvalidArgumentError("fixture needs at least 20 rows");
  if (!(spec.signal_strength >= 0.0) || !std::isfinite(spec.signal_strength))
    throw InvalidArgumentError("signal strength must be a finite non-negative number");

  const auto& manifest = default_manifest();
  std::size_t planted = 0;
  if (spec.planted_group) planted = manifest.count(*spec.planted_group);
  const double scale = planted ? spec.signal_strength / std::sqrt(static_cast<double>(planted)) : 0.0;

  std::ostringstream csv;
  for (const auto& e : manifest.entries) csv << e.column << ';';
  csv << kTargetColumn << '\n';

  Rng rng(spec.seed, Stream::Fixture);
  for (std::size_t row = 0; row < spec.n_rows; ++row) {
    double signal = 0.0;
    for (const auto& e : manifest.entries) {
      double value = 0.0, contribution = 0.0;
      if (kBinaryColumns.contains(e.column)) {
        value = static_cast<double>(rng.below(2));
        contribution = 2.0 * value - 1.0;
      } else {
        value = std::round(rng.normal() * 100.0) / 100.0;
        contribution = value;
      }
      if (spec.planted_group && e.group == *spec.planted_group) signal += contribution;
      csv << format_number(value) << ';';
    }
    const bool enrolled = rng.uniform() < 0.1;
    const double latent = scale * signal + rng.normal();
    csv << (enrolled ? "Enrolled" : latent > 0.0 ? "Dropout" : "Graduate") << '\n';
  }

  std::ostringstream tsv;
  tsv << "# version: fixture\n";
  for (const auto& e : manifest.entries) tsv << e.column << '\t' << to_string(e.group) << '\n';
  return {csv.str(), tsv.str()};
}

void write_fixture(const FixtureSpec& spec, const std::filesystem::path& dir) {
  const auto files = generate_fixture(spec);
  std::filesystem::create_directories(dir);
  for (const auto& [name, text] : {std::pair{"fixture.csv", &files.csv}, std::pair{"fixture_manifest.tsv", &files.manifest}}) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw IoError("cannot write " + (dir / name).string());
    out << *text;
  }
}

}  // namespace dropout
