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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cli.h"

namespace mtme::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const fs::path kFixtures = MTME_FIXTURE_DIR;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("mtme_cli_" + std::string(info->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const json& j) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << j.dump(2);
    return p;
  }

  static json read_json(const fs::path& p) {
    std::ifstream in(p);
    return json::parse(in);
  }

  static std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  }

  fs::path dir_;
};

json spec(std::vector<std::string> labels, std::size_t n, double fraction) {
  json rules = json::array();
  for (const auto& l : labels) rules.push_back({{"label", l}, {"keywords", {l + "kw"}}, {"fraction", fraction}});
  return {{"n_records", n}, {"label_names", labels}, {"rules", rules},
          {"noise_vocab_size", 15}, {"min_tokens", 3}, {"max_tokens", 6}};
}

json tiny_config(std::size_t tasks) {
  json t = json::array();
  t.push_back({{"name", "main"}, {"seed", 1}, {"synthetic", spec({"a", "b"}, 40, 0.3)}});
  for (std::size_t i = 1; i < tasks; ++i) {
    t.push_back({{"name", "aux" + std::to_string(i)}, {"seed", 10 + i},
                 {"synthetic", spec({"a"}, 20, 0.3)}});
  }
  return {{"arch", "multitask"},
          {"tasks", t},
          {"embeddings", {{{"name", "r"}, {"random", true}, {"dim", 4}}}},
          {"model", {{"seq_len", 6}, {"rnn_hidden", 3}, {"cnn_filters", 2}}},
          {"train", {{"batch_size", 8}, {"max_epochs", 2}, {"seed", 5}}},
          {"vocab", {{"min_freq", 1}}}};
}

TEST_F(CliTest, NoSubcommandIsAConfigError) {
  EXPECT_EQ(run({}).code, kExitConfig);
  EXPECT_EQ(run({"bogus"}).code, kExitConfig);
}

TEST_F(CliTest, GradcheckScopesAndFaultInjection) {
  Result ok = run({"gradcheck", "--scope", "dense"});
  EXPECT_EQ(ok.code, kExitOk) << ok.out << ok.err;
  EXPECT_NE(ok.out.find("PASS"), std::string::npos);
  Result bad = run({"gradcheck", "--scope", "dense", "--inject-fault"});
  EXPECT_EQ(bad.code, kExitNumerical);
  EXPECT_NE(bad.out.find("FAIL"), std::string::npos);
  EXPECT_EQ(run({"gradcheck", "--scope", "attention"}).code, kExitConfig);
}

TEST_F(CliTest, TrainFourTasksWritesArtifacts) {
  const fs::path cfg = write("cfg.json", tiny_config(4));
  Result r = run({"train", "--config", cfg.string(), "--out", (dir_ / "out").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  for (const char* f : {"model.mtme", "history.json", "metrics.json", "table.txt"}) {
    EXPECT_TRUE(fs::exists(dir_ / "out" / f)) << f;
  }
  const json metrics = read_json(dir_ / "out" / "metrics.json");
  for (const auto& l : metrics["labels"]) {
    for (const char* cls : {"class0", "class1"}) {
      for (const char* m : {"precision", "recall", "f1"}) {
        const double v = l[cls][m].get<double>();
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
      }
    }
  }
}

TEST_F(CliTest, RerunWithSameSeedIsBitwiseIdentical) {
  const fs::path cfg = write("cfg.json", tiny_config(2));
  ASSERT_EQ(run({"train", "--config", cfg.string(), "--out", (dir_ / "a").string()}).code, 0);
  ASSERT_EQ(run({"train", "--config", cfg.string(), "--out", (dir_ / "b").string()}).code, 0);
  EXPECT_EQ(read_text(dir_ / "a" / "history.json"), read_text(dir_ / "b" / "history.json"));
  EXPECT_EQ(read_text(dir_ / "a" / "model.mtme"), read_text(dir_ / "b" / "model.mtme"));
}

TEST_F(CliTest, MissingEmbeddingFileNamesPath) {
  json c = tiny_config(1);
  c["embeddings"] = {{{"name", "glove"}, {"path", "no_such_vectors.txt"}, {"dim", 4}}};
  const fs::path cfg = write("cfg.json", c);
  Result r = run({"train", "--config", cfg.string(), "--out", (dir_ / "out").string()});
  EXPECT_EQ(r.code, kExitData);
  EXPECT_NE(r.err.find("no_such_vectors.txt"), std::string::npos) << r.err;
}

TEST_F(CliTest, UnknownConfigKeyIsRejected) {
  json c = tiny_config(1);
  c["optimizer"] = "sgd";
  Result r = run({"train", "--config", write("cfg.json", c).string()});
  EXPECT_EQ(r.code, kExitConfig);
}

TEST_F(CliTest, EvalChecksLabelSet) {
  const fs::path cfg = write("cfg.json", tiny_config(1));
  ASSERT_EQ(run({"train", "--config", cfg.string(), "--out", (dir_ / "out").string()}).code, 0);
  const std::string model = (dir_ / "out" / "model.mtme").string();

  std::ofstream(dir_ / "ok.csv") << "id,text,a,b\n1,akw n1,1,0\n2,bkw n2,0,1\n3,n3 n4,0,0\n";
  Result ok = run({"eval", "--model", model, "--data", (dir_ / "ok.csv").string(), "--text-column",
                   "text", "--label-columns", "a,b", "--out", (dir_ / "eval").string()});
  EXPECT_EQ(ok.code, kExitOk) << ok.err;
  EXPECT_TRUE(fs::exists(dir_ / "eval" / "table.txt"));

  std::ofstream(dir_ / "bad.csv") << "id,text,a,c\n1,akw,1,0\n";
  Result bad = run({"eval", "--model", model, "--data", (dir_ / "bad.csv").string(),
                    "--text-column", "text", "--label-columns", "a,c"});
  EXPECT_EQ(bad.code, kExitConfig);
  EXPECT_NE(bad.err.find("mismatch"), std::string::npos) << bad.err;
}

TEST_F(CliTest, AnalyzeMonolingualFixture) {
  std::ofstream(dir_ / "mono.csv") << "id,comment_text,toxic,severe_toxic,obscene,threat,insult,"
                                      "identity_hate\n1,hello there,1,0,0,0,0,0\n2,plain words,0,0,0,0,0,0\n";
  Result r = run({"analyze", "--data", (dir_ / "mono.csv").string(), "--out", dir_.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json a = read_json(dir_ / "analyze.json");
  ASSERT_EQ(a["scripts"].size(), 1u);
  EXPECT_EQ(a["scripts"][0]["script"], "Latin");
  EXPECT_EQ(a["scripts"][0]["documents"], 2);
}

TEST_F(CliTest, AnalyzeMissingFileIsADataError) {
  EXPECT_EQ(run({"analyze", "--data", (dir_ / "none.csv").string()}).code, kExitData);
}

TEST_F(CliTest, SynthWritesReadableCsv) {
  const fs::path s = write("spec.json", spec({"a", "b"}, 12, 0.5));
  Result r = run({"synth", "--spec", s.string(), "--seed", "3", "--out", (dir_ / "syn.csv").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const std::string text = read_text(dir_ / "syn.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "id,text,a,b");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 13);
}

TEST_F(CliTest, CompareIdenticalConfigsGivesIdenticalColumns) {
  json c = tiny_config(1);
  c["test"] = {{"seed", 99}, {"synthetic", spec({"a", "b"}, 30, 0.3)}};
  const fs::path cfg = write("cfg.json", c);
  Result r = run({"compare", "--config", cfg.string(), "--config", cfg.string(), "--out",
                  (dir_ / "cmp").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const json m = read_json(dir_ / "cmp" / "metrics.json");
  ASSERT_EQ(m["models"].size(), 2u);
  EXPECT_EQ(m["models"][0]["labels"], m["models"][1]["labels"]);
  EXPECT_NE(r.out.find("reported, not asserted"), std::string::npos);
}

TEST(CsvFieldTest, QuotesOnlyWhenNeeded) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_field("two\nlines"), "\"two\nlines\"");
}

}  // namespace
}  // namespace mtme::cli
