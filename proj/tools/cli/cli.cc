// Copyright 2026 The MTME Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.h"

#include <algorithm>
#include <fstream>

#include <CLI11.hpp>

#include "mtme/error.h"
#include "mtme/gradient_suite.h"
#include "mtme/serialization.h"
#include "mtme/tape.h"
#include "run_config.h"

namespace mtme::cli {
namespace {

using nlohmann::json;

struct SchemaArgs {
  std::string preset = "jigsaw";
  std::string text_column;
  std::string label_columns;
  std::string id_column;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--preset", preset, "Named column preset")->check(CLI::IsMember({"jigsaw"}));
    cmd->add_option("--text-column", text_column, "Text column (overrides the preset)");
    cmd->add_option("--label-columns", label_columns, "Comma-separated label columns");
    cmd->add_option("--id-column", id_column, "Identifier column");
  }

  bool given() const { return !text_column.empty() || !label_columns.empty() || !id_column.empty(); }

  CsvSchema schema() const {
    CsvSchema s = CsvSchema::jigsaw();
    if (!text_column.empty()) s.text_column = text_column;
    if (!label_columns.empty()) {
      s.label_columns.clear();
      std::stringstream ss(label_columns);
      for (std::string col; std::getline(ss, col, ',');) {
        if (!col.empty()) s.label_columns.push_back(col);
      }
    }
    if (!id_column.empty()) s.id_column = id_column;
    return s;
  }
};

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write '" + path.string() + "'");
  f << text;
}

int cmd_gradcheck(const std::string& scope, std::uint64_t seed, bool inject_fault, std::ostream& out) {
  debug::set_backward_fault(inject_fault);
  const auto results = run_gradient_suite(scope, seed);
  debug::set_backward_fault(false);
  bool ok = true;
  for (const auto& r : results) {
    char line[200];
    std::snprintf(line, sizeof line, "%-10s max_rel_error=%.3e max_entry_error=%.3e entries=%zu %s",
                  r.scope.c_str(), r.report.max_relative_error, r.report.max_entry_error,
                  r.report.entries_checked, r.passed() ? "PASS" : "FAIL");
    out << line << "\n";
    ok = ok && r.passed();
  }
  out << (ok ? "gradcheck passed" : "gradcheck FAILED") << " (tolerance " << kGradTolerance << ")\n";
  return ok ? kExitOk : kExitNumerical;
}

json rare_label_recall(const std::vector<EvaluationTable>& tables) {
  // The label with the fewest positives in the shared test split.
  const auto& labels = tables.front().labels;
  std::size_t rare = 0;
  auto positives = [](const LabelReport& r) { return r.counts.tp + r.counts.fn; };
  for (std::size_t l = 1; l < labels.size(); ++l) {
    if (positives(labels[l]) < positives(labels[rare])) rare = l;
  }
  json recalls = json::array();
  std::string best;
  double best_recall = -1.0;
  for (const auto& t : tables) {
    recalls.push_back({{"model", t.model}, {"recall_class1", t.labels[rare].class1.recall}});
    if (t.labels[rare].class1.recall > best_recall) {
      best_recall = t.labels[rare].class1.recall;
      best = t.model;
    }
  }
  return {{"label", labels[rare].label},
          {"test_positives", positives(labels[rare])},
          {"recall", recalls},
          {"highest_recall_model", best}};
}

int cmd_compare(const std::vector<std::string>& configs, const std::filesystem::path& out_dir,
                std::size_t threads, std::ostream& out) {
  if (configs.size() < 2) throw ConfigError("compare needs at least two configs");
  std::vector<RunConfig> runs;
  for (const auto& c : configs) runs.push_back(load_run_config(c));
  if (!runs.front().test) {
    throw ConfigError("compare needs a 'test' split in the first config; it is shared by all runs");
  }
  const DataSource shared_test = *runs.front().test;
  std::vector<EvaluationTable> tables;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    RunConfig run = runs[i];
    run.output_dir = out_dir / ("run" + std::to_string(i + 1));
    const RunOutput result = run_training(run, threads);
    EvaluationTable t = run_evaluation(result.model_path, shared_test, true, threads,
                                       run.train.threshold);
    t.model = run.name;
    t.dataset_flags = result.table.dataset_flags;
    t.embedding_flags = result.table.embedding_flags;
    tables.push_back(std::move(t));
  }
  const std::string text = render_table(tables);
  json metrics{{"models", to_json(std::span<const EvaluationTable>(tables))},
               {"rare_label_recall", rare_label_recall(tables)}};
  write_file(out_dir / "table.txt", text);
  write_file(out_dir / "metrics.json", metrics.dump(2) + "\n");
  out << text;
  const json& rare = metrics["rare_label_recall"];
  out << "rarest label '" << rare["label"].get<std::string>() << "': highest class-1 recall from '"
      << rare["highest_recall_model"].get<std::string>() << "' (reported, not asserted)\n";
  return kExitOk;
}

}  // namespace

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-task multi-embedding toxic comment classification"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a model from a JSON run config");
  std::string train_config, train_out;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::size_t> epochs_override;
  std::size_t threads = 1;
  train_cmd->add_option("--config", train_config, "Run config (JSON)")->required();
  train_cmd->add_option("--out", train_out, "Output directory (overrides the config)");
  train_cmd->add_option("--seed", seed_override, "Seed (overrides the config)");
  train_cmd->add_option("--epochs", epochs_override, "Maximum epochs (overrides the config)");
  train_cmd->add_option("--threads", threads, "Threads for the final evaluation")->check(CLI::PositiveNumber);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a saved model on a labelled CSV");
  std::string model_path, eval_data, eval_out = ".";
  double threshold = 0.5;
  SchemaArgs eval_schema;
  eval_cmd->add_option("--model", model_path, "Model file (.mtme)")->required();
  eval_cmd->add_option("--data", eval_data, "Labelled CSV")->required();
  eval_cmd->add_option("--out", eval_out, "Directory for table.txt and metrics.json");
  eval_cmd->add_option("--threshold", threshold, "Decision threshold")->check(CLI::Range(0.0, 1.0));
  eval_cmd->add_option("--threads", threads, "Evaluation threads")->check(CLI::PositiveNumber);
  eval_schema.add_to(eval_cmd);

  // analyze
  auto* analyze_cmd = app.add_subcommand("analyze", "Corpus statistics");
  std::string analyze_data, analyze_out = ".";
  std::size_t top_terms = 1000, top_scripts_k = 30;
  SchemaArgs analyze_schema;
  analyze_cmd->add_option("--data", analyze_data, "CSV file")->required();
  analyze_cmd->add_option("--out", analyze_out, "Directory for analyze.json");
  analyze_cmd->add_option("--top-terms", top_terms, "Terms per label and class");
  analyze_cmd->add_option("--top-scripts", top_scripts_k, "Scripts listed");
  analyze_schema.add_to(analyze_cmd);

  // gradcheck
  auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  std::string scope = "all";
  std::uint64_t grad_seed = 7;
  bool inject_fault = false;
  std::vector<std::string> scope_names = gradient_scopes();
  scope_names.push_back("all");
  grad_cmd->add_option("--scope", scope, "Layer scope")->check(CLI::IsMember(scope_names));
  grad_cmd->add_option("--seed", grad_seed, "Seed for the toy parameters");
  grad_cmd->add_flag("--inject-fault", inject_fault)->group("");  // test hook, hidden

  // compare
  auto* compare_cmd = app.add_subcommand("compare", "Train several configs and tabulate them");
  std::vector<std::string> compare_configs;
  std::string compare_out = "compare_out";
  compare_cmd->add_option("--config", compare_configs, "Run configs (two or more)")->required();
  compare_cmd->add_option("--out", compare_out, "Output directory");
  compare_cmd->add_option("--threads", threads, "Evaluation threads")->check(CLI::PositiveNumber);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic corpus as CSV");
  std::string spec_path, synth_out;
  std::uint64_t synth_seed = 0;
  synth_cmd->add_option("--spec", spec_path, "Synthetic corpus spec (JSON)")->required();
  synth_cmd->add_option("--seed", synth_seed, "Seed");
  synth_cmd->add_option("--out", synth_out, "CSV path")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (train_cmd->parsed()) {
      RunConfig cfg = load_run_config(train_config);
      if (!train_out.empty()) cfg.output_dir = train_out;
      if (seed_override) cfg.train.seed = *seed_override;
      if (epochs_override) cfg.train.max_epochs = *epochs_override;
      cfg.validate();
      const RunOutput r = run_training(cfg, threads);
      out << render_table(std::span(&r.table, 1));
      out << "model written to " << r.model_path.string() << "\n";
      return kExitOk;
    }
    if (eval_cmd->parsed()) {
      DataSource src;
      src.csv = eval_data;
      src.schema = eval_schema.schema();
      const EvaluationTable t = run_evaluation(model_path, src, eval_schema.given(), threads, threshold);
      const std::string text = render_table(std::span(&t, 1));
      write_file(std::filesystem::path(eval_out) / "table.txt", text);
      write_file(std::filesystem::path(eval_out) / "metrics.json", to_json(t).dump(2) + "\n");
      out << text;
      return kExitOk;
    }
    if (analyze_cmd->parsed()) {
      const Corpus corpus = load_csv(analyze_data, analyze_schema.schema());
      const json report = analyze_corpus(corpus, top_terms, top_scripts_k);
      write_file(std::filesystem::path(analyze_out) / "analyze.json", report.dump(2) + "\n");
      out << "records: " << report["records"] << "\n";
      for (const auto& l : report["labels"]) {
        out << "  " << l["name"].get<std::string>() << ": " << l["positives"] << " positive ("
            << l["fraction"] << ")\n";
      }
      out << "scripts (Unicode " << report["unicode_version"].get<std::string>() << "):\n";
      for (const auto& s : report["scripts"]) {
        out << "  " << s["script"].get<std::string>() << ": " << s["documents"] << "\n";
      }
      return kExitOk;
    }
    if (grad_cmd->parsed()) return cmd_gradcheck(scope, grad_seed, inject_fault, out);
    if (compare_cmd->parsed()) return cmd_compare(compare_configs, compare_out, threads, out);
    if (synth_cmd->parsed()) {
      std::ifstream in(spec_path);
      if (!in) throw ConfigError("cannot open spec '" + spec_path + "'");
      SyntheticSpec spec;
      try {
        spec = json::parse(in).get<SyntheticSpec>();
      } catch (const json::exception& e) {
        throw ConfigError("spec '" + spec_path + "': " + e.what());
      }
      const Corpus c = synthetic_corpus(spec, synth_seed);
      std::string csv = "id,text";
      for (const auto& l : c.label_names) csv += "," + csv_field(l);
      csv += "\n";
      for (const auto& r : c.records) {
        csv += csv_field(r.id) + "," + csv_field(r.text);
        for (auto v : r.labels) csv += v ? ",1" : ",0";
        csv += "\n";
      }
      write_file(synth_out, csv);
      return kExitOk;
    }
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const IndexError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ShapeError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace mtme::cli
