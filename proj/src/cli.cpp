#include "dropout/cli.hpp"

#include "dropout/eda.hpp"
#include "dropout/error.hpp"
#include "dropout/experiments.hpp"
#include "dropout/report.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <ostream>
#include <thread>

namespace dropout {

namespace {

namespace fs = std::filesystem;

struct Options {
  std::string data;
  std::string manifest;
  std::string delimiter = ";";
  std::vector<std::uint64_t> seeds = kDefaultSeeds;
  double test_fraction = 0.2;
  std::string model = "all";
  std::string exclude;
  std::string out = ".";
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());

  // fixture
  std::size_t rows = 1000;
  std::uint64_t seed = 42;
  std::string planted = "none";
  double signal = 0.0;
};

const std::vector<std::string> kModelChoices = {"svc", "dt", "rf", "knn", "all"};
const std::vector<std::string> kGroupChoices = {"academic", "demographic", "macroeconomic", "socioeconomic"};

// Features shown in the categorical outcome breakdowns.
const std::vector<std::string> kRateFeatures = {
    "Marital status", "Daytime/evening attendance", "Displaced", "Educational special needs",
    "Debtor", "Tuition fees up to date", "Scholarship holder", "International"};

char parse_delimiter(const std::string& text) {
  if (text == "tab" || text == "\\t") return '\t';
  if (text.size() != 1) throw InvalidArgumentError("--delimiter takes a single character");
  return text.front();
}

std::string slug(std::string_view name) {
  std::string s;
  for (const char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c)))
      s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    else if (!s.empty() && s.back() != '_')
      s.push_back('_');
  }
  while (!s.empty() && s.back() == '_') s.pop_back();
  return s;
}

RunConfig make_config(const Options& o) {
  RunConfig config;
  config.data_path = o.data;
  if (!o.manifest.empty()) config.manifest_path = fs::path(o.manifest);
  config.delimiter = parse_delimiter(o.delimiter);
  config.seeds = o.seeds;
  config.test_fraction = o.test_fraction;
  if (o.model != "all") config.models = {*parse_model_tag(o.model)};
  if (!o.exclude.empty()) config.excluded_group = parse_feature_group(o.exclude);
  config.hp.threads = o.threads;
  config.validate();
  return config;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer) {
  std::ostringstream text;
  writer(text);
  write_text(path, text.str());
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

fs::path prepare_out(const Options& o) {
  const fs::path dir(o.out);
  fs::create_directories(dir);
  return dir;
}

Json envelope(std::string_view command, const Options& o, const RunConfig& config, const BinaryDataset& data) {
  auto hp = config.hp;
  return report_envelope(command, o.data, data.manifest_version, config.seeds, config.test_fraction, hp);
}

int run_eda(const Options& o, std::ostream& out) {
  RunConfig config = make_config(o);
  const GroupManifest manifest =
      config.manifest_path ? load_manifest(*config.manifest_path) : default_manifest();
  const Dataset dataset = load_dataset(config.data_path, manifest, config.delimiter);
  const BinaryDataset binary = to_binary(dataset);
  const auto dir = prepare_out(o);

  const auto classes = class_distribution(dataset);
  write_file(dir / "eda_class_distribution.csv", [&](std::ostream& s) { write_class_distribution_csv(s, classes); });

  Json j = report_envelope("eda", o.data, dataset.manifest_version, {}, config.test_fraction, config.hp);
  Json eda;
  eda["class_distribution"] = {{"dropout", classes.dropout}, {"graduate", classes.graduate}, {"enrolled", classes.enrolled}};
  eda["binary_rows"] = binary.rows();

  if (find_column(binary.column_names, kGenderColumn)) {
    const auto gender = gender_distribution(binary);
    write_file(dir / "eda_gender.csv", [&](std::ostream& s) { write_gender_csv(s, gender); });
    eda["gender"] = {{"female_dropout", gender.female_dropout}, {"female_graduate", gender.female_graduate},
                     {"male_dropout", gender.male_dropout},     {"male_graduate", gender.male_graduate},
                     {"female", gender.female()},               {"male", gender.male()}};
  }
  Json rates = Json::object();
  for (const auto& feature : kRateFeatures) {
    if (!find_column(binary.column_names, feature)) continue;
    const auto table = rate_by_category(binary, feature);
    write_file(dir / ("eda_rates_" + slug(feature) + ".csv"),
               [&](std::ostream& s) { write_category_rates_csv(s, table); });
    Json rows = Json::array();
    for (const auto& r : table.rows)
      rows.push_back({{"code", r.code}, {"n", r.n}, {"dropout_rate", r.dropout_rate}, {"graduate_rate", r.graduate_rate}});
    rates[feature] = rows;
  }
  eda["rates"] = rates;
  write_file(dir / "eda_correlation.csv",
             [&](std::ostream& s) { write_correlation_csv(s, correlation_matrix(binary)); });
  j["eda"] = eda;
  write_json(dir / "report.json", j);
  out << "rows " << dataset.rows() << ": dropout " << classes.dropout << ", graduate " << classes.graduate
      << ", enrolled " << classes.enrolled << '\n';
  return 0;
}

int run_train(const Options& o, std::ostream& out, bool plot) {
  const RunConfig config = make_config(o);
  const BinaryDataset data = load_binary(config);
  const auto reports = run_baseline(data, config);
  const auto dir = prepare_out(o);

  Json j = envelope(plot ? "roc" : "train", o, config, data);
  j["excluded_group"] = config.excluded_group ? Json(std::string(to_string(*config.excluded_group))) : Json(nullptr);
  Json runs = Json::array();
  for (const auto& r : reports) {
    runs.push_back(to_json(r));
    write_file(dir / ("roc_" + std::string(model_tag(r.model)) + "_seed" + std::to_string(r.seed) + ".csv"),
               [&](std::ostream& s) { write_roc_csv(s, r.curve); });
    out << model_label(r.model) << " seed " << r.seed << ": AUC " << format_number(r.auc) << '\n';
  }
  j["runs"] = runs;
  write_json(dir / "report.json", j);
  if (plot) {
    std::vector<RocReport> first;
    for (const auto& r : reports)
      if (r.seed == config.seeds.front()) first.push_back(r);
    emit_roc_svg(first, dir / "roc.svg", "ROC, seed " + std::to_string(config.seeds.front()));
  }
  return 0;
}

int run_ablate(const Options& o, std::ostream& out) {
  const RunConfig config = make_config(o);
  const BinaryDataset data = load_binary(config);
  const auto report = run_ablation(data, config);
  const auto influence = rank_group_influence(report);
  const auto dir = prepare_out(o);

  Json j = envelope("ablate", o, config, data);
  j["ablation"] = to_json(report);
  j["influence"] = to_json(influence);
  Json runs = Json::array();
  for (const auto& r : report.runs) runs.push_back(to_json(r));
  j["runs"] = runs;
  write_json(dir / "report.json", j);
  write_json(dir / "ablation.json", to_json(report));
  write_file(dir / "ablation.csv", [&](std::ostream& s) { write_ablation_csv(s, report); });

  // Curves of the first seed: the baseline and one chart per exclusion.
  for (std::size_t c = 0; c < report.columns.size(); ++c) {
    const auto begin = report.runs.begin() + static_cast<std::ptrdiff_t>(c * report.models.size());
    const std::vector<RocReport> curves(begin, begin + static_cast<std::ptrdiff_t>(report.models.size()));
    const auto& column = report.columns[c];
    const std::string name = column ? "roc_excl_" + std::string(to_string(*column)) + ".svg" : "roc.svg";
    const std::string title = column ? "ROC, " + std::string(to_string(*column)) + " excluded" : "ROC, all features";
    emit_roc_svg(curves, dir / name, title + " (seed " + std::to_string(report.seeds.front()) + ")");
  }

  std::ostringstream csv;
  write_ablation_csv(csv, report);
  out << csv.str();
  for (const auto& g : influence) out << to_string(g.group) << " drop " << format_number(g.auc_drop) << '\n';
  return 0;
}

int run_importance(const Options& o, std::ostream& out) {
  const RunConfig config = make_config(o);
  const BinaryDataset data = load_binary(config);
  const auto dir = prepare_out(o);

  Json j = envelope("importance", o, config, data);
  Json per_seed = Json::array();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(data.cols());
  for (const auto seed : config.seeds) {
    const auto s = split(static_cast<std::size_t>(data.rows()), config.test_fraction, seed);
    auto hp = config.hp;
    hp.seed = seed;
    const auto model = train_random_forest(select_rows(data, s.train_rows), hp);
    const auto values = forest_importance_values(model);
    mean += values;
    const auto ranked = forest_importance(model, data.column_names);
    Json top = Json::array();
    for (std::size_t k = 0; k < std::min<std::size_t>(3, ranked.size()); ++k) top.push_back(ranked[k].feature);
    per_seed.push_back({{"seed", seed}, {"top3", top}, {"importance", to_json(ranked)}});
  }
  mean /= static_cast<double>(config.seeds.size());

  ImportanceReport averaged;
  for (Eigen::Index c = 0; c < mean.size(); ++c)
    averaged.push_back({data.column_names[static_cast<std::size_t>(c)], mean(c)});
  std::stable_sort(averaged.begin(), averaged.end(),
                   [](const auto& a, const auto& b) { return a.importance > b.importance; });
  j["per_seed"] = per_seed;
  j["mean_importance"] = to_json(averaged);
  write_json(dir / "report.json", j);
  write_file(dir / "importance.csv", [&](std::ostream& s) {
    s << "feature,importance\n";
    for (const auto& f : averaged) s << '"' << f.feature << "\"," << format_number(f.importance) << '\n';
  });
  for (std::size_t k = 0; k < std::min<std::size_t>(5, averaged.size()); ++k)
    out << averaged[k].feature << ' ' << format_number(averaged[k].importance) << '\n';
  return 0;
}

int run_fixture(const Options& o, std::ostream& out) {
  FixtureSpec spec;
  spec.n_rows = o.rows;
  spec.seed = o.seed;
  if (o.planted != "none") spec.planted_group = parse_feature_group(o.planted);
  spec.signal_strength = o.signal;
  write_fixture(spec, o.out);
  out << "wrote " << (fs::path(o.out) / "fixture.csv").string() << '\n';
  return 0;
}

void add_data_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--data", o.data, "Dataset CSV")->required();
  cmd->add_option("--manifest", o.manifest, "Feature-group manifest (default: built-in 34-column manifest)");
  cmd->add_option("--delimiter", o.delimiter, "Field delimiter, one character or 'tab'")->capture_default_str();
  cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
  cmd->add_option("--threads", o.threads, "Worker threads; results do not depend on it")
      ->check(CLI::PositiveNumber);
}

void add_model_flags(CLI::App* cmd, Options& o, bool with_model, bool with_exclude) {
  cmd->add_option("--seeds", o.seeds, "Comma-separated split seeds")->delimiter(',')->capture_default_str();
  cmd->add_option("--test-fraction", o.test_fraction, "Held-out share of rows")->capture_default_str();
  if (with_model)
    cmd->add_option("--model", o.model, "Model to run")->check(CLI::IsMember(kModelChoices))->capture_default_str();
  if (with_exclude) cmd->add_option("--exclude", o.exclude, "Feature group to drop")->check(CLI::IsMember(kGroupChoices));
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Student dropout prediction: ingestion, classifiers, ROC-AUC, feature-group ablation", "dropout"};
  app.require_subcommand(1);

  auto* eda = app.add_subcommand("eda", "Class, gender and category breakdowns plus the correlation matrix");
  add_data_flags(eda, o);

  auto* train = app.add_subcommand("train", "Train and evaluate models; writes ROC CSVs and report.json");
  add_data_flags(train, o);
  add_model_flags(train, o, true, true);

  auto* roc = app.add_subcommand("roc", "Like train, and also draws roc.svg for the first seed");
  add_data_flags(roc, o);
  add_model_flags(roc, o, true, true);

  auto* ablate = app.add_subcommand("ablate", "Baseline plus the four group exclusions");
  add_data_flags(ablate, o);
  add_model_flags(ablate, o, true, false);

  auto* importance = app.add_subcommand("importance", "Random-forest impurity importance per seed");
  add_data_flags(importance, o);
  add_model_flags(importance, o, false, false);

  auto* fixture = app.add_subcommand("fixture", "Write a synthetic dataset and manifest");
  fixture->add_option("--rows", o.rows, "Row count (>= 20)")->capture_default_str();
  fixture->add_option("--seed", o.seed, "Generator seed")->capture_default_str();
  std::vector<std::string> planted_choices = kGroupChoices;
  planted_choices.push_back("none");
  fixture->add_option("--planted", o.planted, "Group that carries the label signal")
      ->check(CLI::IsMember(planted_choices))
      ->capture_default_str();
  fixture->add_option("--signal", o.signal, "Signal strength (0 = labels are noise)")->capture_default_str();
  fixture->add_option("--out", o.out, "Output directory")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return 2;
  }

  try {
    if (eda->parsed()) return run_eda(o, out);
    if (train->parsed()) return run_train(o, out, false);
    if (roc->parsed()) return run_train(o, out, true);
    if (ablate->parsed()) return run_ablate(o, out);
    if (importance->parsed()) return run_importance(o, out);
    if (fixture->parsed()) return run_fixture(o, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace dropout
