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

#include "run_config.h"

#include <fstream>
#include <set>
#include <sstream>

#include "mtme/corpus.h"
#include "mtme/error.h"
#include "mtme/serialization.h"
#include "mtme/text.h"

namespace mtme::cli {
namespace {

using nlohmann::json;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T get(const json& j, const char* key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + ": missing or invalid '" + key + "'");
  }
}

template <typename T>
void maybe(const json& j, const char* key, T& out, const std::string& where) {
  if (j.contains(key)) out = get<T>(j, key, where);
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

CsvSchema parse_schema(const json& j, const std::string& where) {
  if (j.is_string()) {
    if (j.get<std::string>() == "jigsaw") return CsvSchema::jigsaw();
    throw ConfigError(where + ": unknown schema preset '" + j.get<std::string>() + "'");
  }
  check_keys(j, {"text_column", "label_columns", "id_column"}, where);
  CsvSchema s;
  s.text_column = get<std::string>(j, "text_column", where);
  s.label_columns = get<std::vector<std::string>>(j, "label_columns", where);
  if (s.label_columns.empty()) throw ConfigError(where + ": label_columns is empty");
  if (j.contains("id_column")) s.id_column = get<std::string>(j, "id_column", where);
  return s;
}

json schema_json(const CsvSchema& s) {
  json j{{"text_column", s.text_column}, {"label_columns", s.label_columns}};
  if (s.id_column) j["id_column"] = *s.id_column;
  return j;
}

DataSource parse_source(const json& j, const std::filesystem::path& base, const std::string& where,
                        std::set<std::string> extra = {}) {
  std::set<std::string> keys{"csv", "schema", "synthetic", "seed"};
  keys.insert(extra.begin(), extra.end());
  check_keys(j, keys, where);
  DataSource d;
  if (j.contains("csv") == j.contains("synthetic")) {
    throw ConfigError(where + ": give exactly one of 'csv' or 'synthetic'");
  }
  if (j.contains("csv")) d.csv = resolve(base, get<std::string>(j, "csv", where));
  if (j.contains("schema")) d.schema = parse_schema(j["schema"], where + ".schema");
  if (j.contains("synthetic")) {
    try {
      d.synthetic = j["synthetic"].get<SyntheticSpec>();
    } catch (const json::exception& e) {
      throw ConfigError(where + ".synthetic: " + e.what());
    }
    d.synthetic->validate();
    // Matches the CSV layout written by `mtme synth`.
    if (!j.contains("schema")) d.schema = {"text", d.synthetic->label_names, std::string("id")};
  }
  maybe(j, "seed", d.synthetic_seed, where);
  return d;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

Corpus subset(const Corpus& c, const std::vector<std::size_t>& rows) {
  Corpus out;
  out.label_names = c.label_names;
  for (auto r : rows) out.records.push_back(c.records[r]);
  return out;
}

Corpus concat(const std::vector<Corpus>& parts) {
  Corpus out;
  for (const auto& p : parts) out.records.insert(out.records.end(), p.records.begin(), p.records.end());
  return out;
}

EvaluationTable evaluate_classical(const ClassicalModel& model, const Corpus& data, double threshold,
                                   const std::string& name) {
  const auto probs = classical_proba(model, model.tfidf.transform(data));
  std::vector<double> targets;
  for (const auto& rec : data.records) targets.insert(targets.end(), rec.labels.begin(), rec.labels.end());
  const std::size_t k = model.label_names.size();
  std::vector<LabelReport> reports;
  for (std::size_t l = 0; l < k; ++l) {
    reports.push_back(make_label_report(model.label_names[l],
                                        confusion_from_predictions(probs, targets, k, l, threshold)));
  }
  return make_evaluation_table(name, std::move(reports));
}

void check_labels(const std::vector<std::string>& expected, const Corpus& data,
                  const std::string& what) {
  if (data.label_names != expected) {
    std::string e, g;
    for (const auto& s : expected) e += (e.empty() ? "" : ",") + s;
    for (const auto& s : data.label_names) g += (g.empty() ? "" : ",") + s;
    throw ConfigError("label-set mismatch for " + what + ": model has [" + e + "], data has [" + g + "]");
  }
}

void write_outputs(const std::filesystem::path& dir, const json& history, const EvaluationTable& table) {
  write_text(dir / "history.json", history.dump(2) + "\n");
  write_text(dir / "metrics.json", to_json(table).dump(2) + "\n");
  write_text(dir / "table.txt", render_table(std::span(&table, 1)));
}

}  // namespace

Corpus DataSource::load() const {
  Corpus c = csv ? load_csv(*csv, schema) : synthetic_corpus(*synthetic, synthetic_seed);
  if (c.size() == 0) throw DataError(describe() + " holds no records");
  return c;
}

std::string DataSource::describe() const {
  return csv ? "CSV '" + csv->string() + "'"
             : "synthetic corpus (seed " + std::to_string(synthetic_seed) + ")";
}

void RunConfig::validate() const {
  if (tasks.empty()) throw ConfigError("config lists no tasks");
  std::set<std::string> names;
  for (const auto& t : tasks) {
    if (!names.insert(t.name).second) throw ConfigError("duplicate task '" + t.name + "'");
  }
  if (is_neural(arch)) {
    if (embeddings.empty()) throw ConfigError(to_string(arch) + " needs at least one embedding");
    if (arch != ArchKind::kMultitask && (tasks.size() != 1 || embeddings.size() != 1)) {
      throw ConfigError(to_string(arch) + " is a single-task, single-embedding architecture");
    }
  } else if (tasks.size() != 1) {
    throw ConfigError(to_string(arch) + " trains on exactly one task");
  }
  train.validate();
}

RunConfig parse_run_config(const json& j, const std::filesystem::path& base) {
  check_keys(j, {"name", "arch", "tasks", "test", "embeddings", "model", "train", "vocab",
                 "classical", "output_dir"},
             "config");
  RunConfig cfg;
  cfg.arch = arch_from_string(get<std::string>(j, "arch", "config"));
  cfg.name = j.contains("name") ? get<std::string>(j, "name", "config") : to_string(cfg.arch);

  if (!j.contains("tasks") || !j["tasks"].is_array()) {
    throw ConfigError("config needs a 'tasks' array");
  }
  const json& tasks = j["tasks"];
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const std::string where = "tasks[" + std::to_string(i) + "]";
    cfg.tasks.push_back({get<std::string>(tasks[i], "name", where),
                         parse_source(tasks[i], base, where, {"name"})});
  }
  if (j.contains("test")) cfg.test = parse_source(j["test"], base, "test");

  if (j.contains("embeddings")) {
    if (!j["embeddings"].is_array()) throw ConfigError("'embeddings' must be an array");
    for (std::size_t i = 0; i < j["embeddings"].size(); ++i) {
      const json& e = j["embeddings"][i];
      const std::string where = "embeddings[" + std::to_string(i) + "]";
      check_keys(e, {"name", "path", "dim", "random"}, where);
      EmbeddingSource src;
      src.name = get<std::string>(e, "name", where);
      maybe(e, "dim", src.dim, where);
      maybe(e, "random", src.random, where);
      if (e.contains("path")) src.path = resolve(base, get<std::string>(e, "path", where));
      if (src.random == src.path.has_value()) {
        throw ConfigError(where + ": give either 'path' or \"random\": true");
      }
      cfg.embeddings.push_back(std::move(src));
    }
  }

  if (j.contains("model")) {
    const json& m = j["model"];
    check_keys(m, {"seq_len", "rnn_hidden", "cnn_filters", "cnn_kernel", "dropout_rate",
                   "baseline_cnn_filters", "baseline_cnn_kernels", "baseline_cnn_hidden"},
               "model");
    maybe(m, "seq_len", cfg.model.seq_len, "model");
    maybe(m, "rnn_hidden", cfg.model.rnn_hidden, "model");
    maybe(m, "cnn_filters", cfg.model.cnn_filters, "model");
    maybe(m, "cnn_kernel", cfg.model.cnn_kernel, "model");
    maybe(m, "dropout_rate", cfg.model.dropout_rate, "model");
    maybe(m, "baseline_cnn_filters", cfg.model.baseline_cnn_filters, "model");
    maybe(m, "baseline_cnn_kernels", cfg.model.baseline_cnn_kernels, "model");
    maybe(m, "baseline_cnn_hidden", cfg.model.baseline_cnn_hidden, "model");
  }
  if (j.contains("train")) {
    try {
      cfg.train = j["train"].get<TrainConfig>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("train: ") + e.what());
    }
  }
  if (j.contains("vocab")) {
    check_keys(j["vocab"], {"min_freq", "max_size"}, "vocab");
    maybe(j["vocab"], "min_freq", cfg.vocab.min_freq, "vocab");
    maybe(j["vocab"], "max_size", cfg.vocab.max_size, "vocab");
  }
  if (j.contains("classical")) {
    const json& c = j["classical"];
    check_keys(c, {"max_features", "epochs", "lr", "batch_size", "max_depth", "min_leaf"},
               "classical");
    maybe(c, "max_features", cfg.classical.max_features, "classical");
    maybe(c, "epochs", cfg.classical.logreg.epochs, "classical");
    maybe(c, "lr", cfg.classical.logreg.lr, "classical");
    maybe(c, "batch_size", cfg.classical.logreg.batch_size, "classical");
    maybe(c, "max_depth", cfg.classical.tree.max_depth, "classical");
    maybe(c, "min_leaf", cfg.classical.tree.min_leaf, "classical");
  }
  if (j.contains("output_dir")) {
    cfg.output_dir = resolve(base, get<std::string>(j, "output_dir", "config"));
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_run_config(j, path.parent_path().empty() ? "." : path.parent_path());
}

RunOutput run_training(const RunConfig& cfg, std::size_t eval_threads) {
  cfg.validate();
  std::filesystem::create_directories(cfg.output_dir);
  const Rng root(cfg.train.seed);

  std::vector<Corpus> corpora;
  for (const auto& t : cfg.tasks) corpora.push_back(t.data.load());
  const Corpus main_full = corpora.front();
  Rng split_rng = root.fork("split");
  const auto [train_rows, val_rows] =
      split_indices(main_full.size(), cfg.train.validation_fraction, split_rng);
  corpora.front() = subset(main_full, train_rows);
  const Corpus val = subset(main_full, val_rows);
  Corpus eval_set = val;
  if (cfg.test) {
    eval_set = cfg.test->load();
    check_labels(main_full.label_names, eval_set, "the test split");
  }

  const std::string& main_task = cfg.tasks.front().name;
  const std::filesystem::path model_path = cfg.output_dir / "model.mtme";
  std::vector<Flag> dataset_flags;
  for (const auto& t : cfg.tasks) dataset_flags.push_back({t.name, true});
  std::vector<Flag> embedding_flags;
  for (const auto& e : cfg.embeddings) embedding_flags.push_back({e.name, true});
  json metadata{{"main_task", main_task},
                {"schema", schema_json(cfg.tasks.front().data.schema)},
                {"labels", main_full.label_names}};

  RunOutput out;
  out.model_name = cfg.name;
  out.model_path = model_path;

  if (!is_neural(cfg.arch)) {
    ClassicalModel model = train_classical(cfg.arch, corpora.front(), cfg.classical);
    model.metadata = metadata;
    write_archive(to_archive(model), model_path);
    out.history = json{{"arch", to_string(cfg.arch)}, {"epochs", json::array()}};
    out.table = evaluate_classical(model, eval_set, cfg.train.threshold, cfg.name);
    out.table.dataset_flags = dataset_flags;
    write_outputs(cfg.output_dir, out.history, out.table);
    return out;
  }

  const Vocabulary vocab = build_vocab(concat(corpora), cfg.vocab.min_freq, cfg.vocab.max_size);
  std::vector<EmbeddingTable> tables;
  json emb_meta = json::array();
  for (const auto& e : cfg.embeddings) {
    if (e.random) {
      Rng r = root.fork("embedding/" + e.name);
      tables.push_back(random_embeddings(vocab.size(), e.dim, r));
      emb_meta.push_back({{"name", e.name}, {"random", true}, {"dim", e.dim}});
    } else {
      EmbeddingMatrix m = load_embeddings(*e.path, vocab, e.dim);
      emb_meta.push_back({{"name", e.name}, {"dim", e.dim}, {"coverage", m.coverage}});
      tables.push_back(std::move(m.table));
    }
  }

  MultiTaskConfig mcfg = cfg.model;
  mcfg.embedding_sources.clear();
  for (const auto& e : cfg.embeddings) mcfg.embedding_sources.push_back(e.name);
  mcfg.tasks.clear();
  for (std::size_t t = 0; t < cfg.tasks.size(); ++t) {
    mcfg.tasks.push_back({cfg.tasks[t].name, corpora[t].label_names.size()});
  }
  Rng model_rng = root.fork("model");
  ModelParams model = build_model(cfg.arch, mcfg, std::move(tables), model_rng);

  std::vector<TaskData> data;
  for (std::size_t t = 0; t < cfg.tasks.size(); ++t) {
    data.push_back({cfg.tasks[t].name, encode(corpora[t], vocab, mcfg.seq_len)});
  }
  const EncodedDataset val_enc = encode(val, vocab, mcfg.seq_len);
  TrainResult result = train(std::move(model), data, cfg.train, &val_enc);

  const auto& toks = vocab.tokens();
  metadata["vocab"] = std::vector<std::string>(toks.begin() + 2, toks.end());
  metadata["embeddings"] = emb_meta;
  ModelParams best = std::move(result.best);
  best.metadata = metadata;
  save_model(best, model_path);

  out.history = to_json(result);
  out.table = evaluate(best, encode(eval_set, vocab, mcfg.seq_len), main_task, cfg.train.threshold,
                       eval_threads, cfg.name);
  out.table.dataset_flags = dataset_flags;
  out.table.embedding_flags = embedding_flags;
  write_outputs(cfg.output_dir, out.history, out.table);
  return out;
}

EvaluationTable run_evaluation(const std::filesystem::path& model_path, const DataSource& data,
                               bool schema_given, std::size_t threads, double threshold) {
  const TensorArchive archive = read_archive(model_path);
  const ArchKind arch = archive_arch(archive);
  const json meta = archive.header.value("metadata", json::object());
  DataSource source = data;
  if (!schema_given && meta.contains("schema")) source.schema = parse_schema(meta["schema"], "stored schema");
  const Corpus corpus = source.load();
  const std::string name = to_string(arch);

  if (!is_neural(arch)) {
    const ClassicalModel model = classical_from_archive(archive);
    check_labels(model.label_names, corpus, source.describe());
    return evaluate_classical(model, corpus, threshold, name);
  }
  const ModelParams model = from_archive(archive);
  if (!meta.contains("vocab") || !meta.contains("main_task") || !meta.contains("labels")) {
    throw FormatError("model file lacks vocabulary or task metadata", 12);
  }
  const Vocabulary vocab(meta["vocab"].get<std::vector<std::string>>());
  check_labels(meta["labels"].get<std::vector<std::string>>(), corpus, source.describe());
  return evaluate(model, encode(corpus, vocab, model.config.seq_len),
                  meta["main_task"].get<std::string>(), threshold, threads, name);
}

json analyze_corpus(const Corpus& corpus, std::size_t top_terms, std::size_t top_scripts_k) {
  const LabelStats stats = label_stats(corpus);
  json labels = json::array();
  for (std::size_t i = 0; i < stats.label_names.size(); ++i) {
    labels.push_back({{"name", stats.label_names[i]},
                      {"positives", stats.positives[i]},
                      {"fraction", stats.fractions[i]}});
  }
  json scripts = json::array();
  for (const auto& [script, count] : top_scripts(detect_scripts(corpus), top_scripts_k)) {
    scripts.push_back({{"script", script}, {"documents", count}});
  }
  json terms = json::object();
  for (const auto& label : corpus.label_names) {
    json by_class = json::object();
    for (int cls : {1, 0}) {
      json list = json::array();
      for (const auto& [tok, count] : term_frequencies(corpus, label, cls == 1, top_terms)) {
        list.push_back({tok, count});
      }
      by_class[std::to_string(cls)] = list;
    }
    terms[label] = by_class;
  }
  return {{"records", stats.records},
          {"labels", labels},
          {"cardinality", stats.cardinality},
          {"scripts", scripts},
          {"unicode_version", std::string(unicode_scripts_version())},
          {"term_frequencies", terms}};
}

}  // namespace mtme::cli
