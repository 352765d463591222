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
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "mtme/corpus.h"
#include "mtme/csv.h"
#include "mtme/embeddings.h"
#include "mtme/error.h"
#include "mtme/synthetic.h"
#include "mtme/text.h"

namespace mtme {
namespace {

using Tokens = std::vector<std::string>;

const std::filesystem::path kFixtures = MTME_FIXTURE_DIR;

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / ("mtme_data_" + name);
  std::ofstream(path, std::ios::binary) << content;
  return path;
}

Corpus corpus_of(std::vector<std::string> texts, std::vector<std::vector<std::uint8_t>> labels,
                 std::vector<std::string> names) {
  Corpus c;
  c.label_names = std::move(names);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    c.records.push_back({"r" + std::to_string(i), texts[i], labels[i]});
  }
  return c;
}

TEST(CsvTest, QuotingCommasAndNewlines) {
  const CsvTable t = parse_csv("\xEF\xBB\xBFid,text\n1,\"a, b\"\n2,\"x\ny \"\"q\"\"\"\n\n3,plain\n");
  ASSERT_EQ(t.header, (Tokens{"id", "text"}));
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_EQ(t.rows[0][1], "a, b");
  EXPECT_EQ(t.rows[1][1], "x\ny \"q\"");
  EXPECT_EQ(t.rows[2][1], "plain");
  EXPECT_EQ(t.lines[2], 6u);
}

TEST(CsvTest, MalformedInputNamesTheLine) {
  EXPECT_THROW(parse_csv("a,b\n1,\"open\n"), DataError);
  try {
    parse_csv("a,b\n1,2\n3\n");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_EQ(e.location(), 3u);
  }
}

TEST(CsvTest, ThreeRowJigsawFixture) {
  const std::string text =
      "id,comment_text,toxic,severe_toxic,obscene,threat,insult,identity_hate\n"
      "a,\"hi, there\",0,0,0,0,0,0\n"
      "b,\"two\nlines\",1,0,1,0,1,0\n"
      "c,plain,0,0,0,1,0,0\n";
  Corpus c = corpus_from_csv(parse_csv(text), CsvSchema::jigsaw());
  EXPECT_EQ(c.size(), 3u);
  EXPECT_EQ(c.label_names.size(), 6u);
  EXPECT_EQ(c.records[0].text, "hi, there");
  EXPECT_EQ(c.records[1].text, "two\nlines");
  EXPECT_EQ(c.records[1].labels, (std::vector<std::uint8_t>{1, 0, 1, 0, 1, 0}));
  EXPECT_EQ(c.records[2].id, "c");
}

TEST(CsvTest, BadLabelAndMissingColumn) {
  const std::string bad = "id,comment_text,toxic,severe_toxic,obscene,threat,insult,identity_hate\n"
                          "a,x,0,0,0,0,0,0\n"
                          "b,y,2,0,0,0,0,0\n";
  try {
    corpus_from_csv(parse_csv(bad), CsvSchema::jigsaw());
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(corpus_from_csv(parse_csv("id,text\n1,x\n"), CsvSchema::jigsaw()), DataError);
  EXPECT_THROW(load_csv(kFixtures / "no_such_file.csv", CsvSchema::jigsaw()), DataError);
}

TEST(TokenizeTest, RuleExamples) {
  EXPECT_EQ(tokenize("You ARE a Fool!!"), (Tokens{"you", "are", "a", "fool"}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_EQ(tokenize("don't"), (Tokens{"don", "t"}));
  EXPECT_EQ(tokenize("Привет, МИР"), (Tokens{"привет", "мир"}));
  EXPECT_EQ(tokenize("abc123 x_y"), (Tokens{"abc123", "x", "y"}));
  EXPECT_EQ(tokenize("cafe\xCC\x81!"), (Tokens{"cafe\xCC\x81"}));
  EXPECT_EQ(tokenize("ok\xFFgo"), (Tokens{"ok", "go"}));
}

TEST(ScriptTest, CodepointLookup) {
  EXPECT_EQ(script_of(U'a'), "Latin");
  EXPECT_EQ(script_of(U'м'), "Cyrillic");
  EXPECT_EQ(script_of(U'م'), "Arabic");
  EXPECT_EQ(script_of(U'1'), "Common");
  EXPECT_EQ(script_of(U'́'), "Inherited");
  EXPECT_EQ(scripts_in("hello мир 42"), (Tokens{"Cyrillic", "Latin"}));
}

TEST(ScriptTest, HistogramCountsDocuments) {
  Corpus c = corpus_of({"hello мир", "مرحبا", "plain", "more plain"}, {{}, {}, {}, {}}, {});
  ScriptHistogram h = detect_scripts(c);
  EXPECT_EQ(h, (ScriptHistogram{{"Arabic", 1}, {"Cyrillic", 1}, {"Latin", 3}}));
  Corpus ascii = corpus_of({"a", "b c", "d"}, {{}, {}, {}}, {});
  EXPECT_EQ(detect_scripts(ascii), (ScriptHistogram{{"Latin", 3}}));
  const auto top = top_scripts(h, 2);
  ASSERT_EQ(top.size(), 2u);
  EXPECT_EQ(top[0].first, "Latin");
}

TEST(VocabTest, FrequencyOrderAndFilters) {
  Corpus c = corpus_of({"the cat the dog", "the end cat", "dog the"}, {{}, {}, {}}, {});
  Vocabulary v = build_vocab(c);
  EXPECT_EQ(v.token(kPadId), "<pad>");
  EXPECT_EQ(v.token(kOovId), "<oov>");
  EXPECT_EQ(v.index("the"), 2);
  // cat and dog both occur twice; cat appears first.
  EXPECT_EQ(v.index("cat"), 3);
  EXPECT_EQ(v.index("dog"), 4);
  EXPECT_EQ(v.index("end"), kOovId);
  EXPECT_EQ(v.size(), 5u);

  Corpus unique = corpus_of({"a b", "c d"}, {{}, {}}, {});
  EXPECT_EQ(build_vocab(unique).size(), 2u);
  EXPECT_EQ(build_vocab(c).tokens(), v.tokens());
  EXPECT_EQ(build_vocab(c, 1, 2).size(), 4u);  // two tokens plus the reserved ids
}

TEST(EncodeTest, PaddingTruncationAndRoundTrip) {
  Vocabulary v({"a", "b", "c"});
  std::size_t len = 0;
  EXPECT_EQ(encode_text("a b", v, 5, &len), (std::vector<std::int32_t>{2, 3, 0, 0, 0}));
  EXPECT_EQ(len, 2u);
  EXPECT_EQ(encode_text("c c a b x", v, 3, &len), (std::vector<std::int32_t>{4, 4, 2}));
  EXPECT_EQ(len, 5u);
  const auto ids = encode_text("b zzz c", v, 4);
  EXPECT_EQ(decode_ids(ids, v), (Tokens{"b", "<oov>", "c"}));

  Corpus c = corpus_of({"a b", "c"}, {{1, 0}, {0, 1}}, {"p", "q"});
  EncodedDataset d = encode(c, v, 3);
  EXPECT_EQ(d.ids.rows, 2u);
  EXPECT_EQ(d.labels, (std::vector<double>{1, 0, 0, 1}));
  EXPECT_EQ(d.subset(std::vector<std::size_t>{1}).labels, (std::vector<double>{0, 1}));
}

TEST(EmbeddingsTest, FivetokenFixtureCoverage) {
  Vocabulary v({"alpha", "beta", "gamma", "delta", "epsilon"});
  EmbeddingMatrix m = load_embeddings(kFixtures / "embeddings_5.txt", v, 3);
  EXPECT_EQ(m.covered, 2u);
  EXPECT_EQ(m.coverage, 0.4);
  const Tensor& t = m.table.matrix();
  ASSERT_EQ(t.shape(), (Shape{7, 3}));
  EXPECT_EQ(t.at(v.index("alpha"), 2), 0.3);
  EXPECT_EQ(t.at(v.index("gamma"), 0), -0.5);
  for (const char* missing : {"beta", "delta", "epsilon"}) {
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(t.at(v.index(missing), j), 0.0);
  }
  for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(t.at(0, j), 0.0);
}

TEST(EmbeddingsTest, MalformedLinesNameTheLine) {
  Vocabulary v({"a"});
  const auto short_line = write_temp("short.txt", "a 1 2 3\nb 1 2\n");
  try {
    load_embeddings(short_line, v, 3);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_EQ(e.location(), 2u);
  }
  const auto bad_float = write_temp("bad.txt", "1000 3\na 1 x 3\n");
  EXPECT_THROW(load_embeddings(bad_float, v, 3), DataError);
  const auto header_only = write_temp("hdr.txt", "1000 3\na 1 2 3\n");
  EXPECT_EQ(load_embeddings(header_only, v, 3).covered, 1u);
  EXPECT_THROW(load_embeddings(header_only, v, 4), DataError);
  EXPECT_THROW(load_embeddings(kFixtures / "missing.txt", v, 3), DataError);
}

TEST(LabelStatsTest, FractionsAndCardinality) {
  std::vector<std::string> texts(10, "x");
  std::vector<std::vector<std::uint8_t>> labels(10, {0, 0});
  labels[3] = {0, 1};
  Corpus c = corpus_of(texts, labels, {"toxic", "threat"});
  LabelStats s = label_stats(c);
  EXPECT_EQ(s.fractions[1], 0.1);
  EXPECT_EQ(s.cardinality, (std::vector<std::size_t>{9, 1, 0}));
  labels[3] = {0, 0};
  EXPECT_EQ(label_stats(corpus_of(texts, labels, {"toxic", "threat"})).cardinality,
            (std::vector<std::size_t>{10, 0, 0}));
}

TEST(TermFrequencyTest, RanksAndFilters) {
  Corpus c = corpus_of({"kill you now", "i will kill", "hello there", "kill kill"},
                       {{1}, {1}, {0}, {1}}, {"threat"});
  const auto pos = term_frequencies(c, "threat", true, 1000);
  ASSERT_FALSE(pos.empty());
  EXPECT_EQ(pos[0], (std::pair<std::string, std::size_t>{"kill", 4}));
  EXPECT_EQ(pos.size(), 5u);
  EXPECT_EQ(term_frequencies(c, "threat", true, 2).size(), 2u);
  Corpus none = corpus_of({"a"}, {{0}}, {"threat"});
  EXPECT_TRUE(term_frequencies(none, "threat", true).empty());
  EXPECT_THROW(term_frequencies(c, "insult", true), ConfigError);
}

TEST(SyntheticTest, RareLabelCountAndRescan) {
  SyntheticSpec s;
  s.n_records = 10000;
  s.label_names = {"toxic", "threat"};
  s.rules = {{"toxic", {"stupid", "idiot"}, 0.1, 1}, {"threat", {"kill"}, 0.003, 1}};
  const Corpus c = synthetic_corpus(s, 17);
  std::size_t threats = 0;
  for (const auto& r : c.records) {
    const auto toks = tokenize(r.text);
    const bool has_kill = std::find(toks.begin(), toks.end(), "kill") != toks.end();
    EXPECT_EQ(has_kill, r.labels[1] == 1) << r.text;
    threats += r.labels[1];
  }
  // Binomial(10000, 0.003): mean 30, standard deviation about 5.5.
  EXPECT_GE(threats, 8u);
  EXPECT_LE(threats, 52u);
  const Corpus again = synthetic_corpus(s, 17);
  ASSERT_EQ(again.size(), c.size());
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(again.records[i].text, c.records[i].text);
}

TEST(SyntheticTest, ImpossibleSpecsAreRejected) {
  SyntheticSpec s;
  s.label_names = {"a"};
  s.rules = {{"a", {}, 0.5, 1}};
  EXPECT_THROW(synthetic_corpus(s, 1), ConfigError);
  s.rules = {{"a", {"n3"}, 0.5, 1}};
  EXPECT_THROW(synthetic_corpus(s, 1), ConfigError);
  s.rules = {{"a", {"Upper"}, 0.5, 1}};
  EXPECT_THROW(synthetic_corpus(s, 1), ConfigError);
  EXPECT_THROW((nlohmann::json{{"records", 5}}.get<SyntheticSpec>()), ConfigError);
}

TEST(BatchTest, SizesAndSeededShuffles) {
  Vocabulary v({"a"});
  std::vector<std::string> texts(10, "a");
  std::vector<std::vector<std::uint8_t>> labels(10, {0});
  EncodedDataset d = encode(corpus_of(texts, labels, {"l"}), v, 2);
  Rng rng(3);
  const auto e1 = batches(d, 3, rng);
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> order1, order2;
  for (const auto& b : e1) {
    sizes.push_back(b.rows.size());
    order1.insert(order1.end(), b.rows.begin(), b.rows.end());
  }
  EXPECT_EQ(sizes, (std::vector<std::size_t>{3, 3, 3, 1}));
  for (const auto& b : batches(d, 3, rng)) order2.insert(order2.end(), b.rows.begin(), b.rows.end());
  EXPECT_NE(order1, order2);
  std::vector<std::size_t> sorted = order1;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(sorted[i], i);

  Rng again(3);
  std::vector<std::size_t> replay;
  for (const auto& b : batches(d, 3, again)) replay.insert(replay.end(), b.rows.begin(), b.rows.end());
  EXPECT_EQ(replay, order1);
}

TEST(SplitTest, DisjointAndComplete) {
  Rng rng(4);
  const auto [train, val] = split_indices(50, 0.1, rng);
  EXPECT_EQ(val.size(), 5u);
  EXPECT_EQ(train.size(), 45u);
  std::set<std::size_t> all(train.begin(), train.end());
  all.insert(val.begin(), val.end());
  EXPECT_EQ(all.size(), 50u);
  Rng bad(0);
  EXPECT_THROW(split_indices(50, 0.0, bad), ConfigError);
}

}  // namespace
}  // namespace mtme
