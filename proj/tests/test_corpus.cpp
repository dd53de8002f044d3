#include <doctest.h>
#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsdar/corpus.hpp"

using namespace bsdar;

namespace {

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() /
         (std::string("bsdar_corpus_") + name + "_" +
          std::to_string(::getpid()));
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& content) {
  std::ofstream out(path);
  out << content;
}

struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const char* name) : path(temp_file(name)) {}
  ~TempFile() { std::filesystem::remove(path); }
};

// Occurrence ranges of every phrase in the token list, found by scanning.
std::vector<std::pair<std::size_t, std::size_t>> phrase_ranges(
    const std::vector<std::string>& tokens,
    const std::vector<std::vector<std::string>>& phrases) {
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (const auto& phrase : phrases) {
    for (std::size_t s = 0; s + phrase.size() <= tokens.size(); ++s) {
      if (std::equal(phrase.begin(), phrase.end(), tokens.begin() + s)) {
        ranges.emplace_back(s, phrase.size());
      }
    }
  }
  std::sort(ranges.begin(), ranges.end());
  return ranges;
}

}  // namespace

TEST_CASE("corpus files round-trip") {
  std::vector<CorpusRecord> records;
  records.push_back({"a", {"x", "y", "z"}, {{"x", "y"}, {"q"}}});
  records.push_back({"b", {"w"}, {}});

  TempFile f("roundtrip");
  write_corpus(f.path.string(), records);
  auto loaded = read_corpus(f.path.string());

  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].id == "a");
  CHECK(loaded[0].tokens == records[0].tokens);
  CHECK(loaded[0].keyphrases == records[0].keyphrases);
  CHECK(loaded[1].id == "b");
  CHECK(loaded[1].keyphrases.empty());
}

TEST_CASE("corpus tokens are lowercased on read") {
  TempFile f("lower");
  write_text_file(f.path,
                  "{\"id\":\"a\",\"tokens\":[\"ToKeN\",\"UP\"],"
                  "\"keyphrases\":[[\"ToKeN\"]]}\n");
  auto loaded = read_corpus(f.path.string());
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].tokens == std::vector<std::string>{"token", "up"});
  CHECK(loaded[0].keyphrases[0] == std::vector<std::string>{"token"});
}

TEST_CASE("corpus read errors name the file and line") {
  TempFile f("errors");
  auto expect_error = [&f](const std::string& content,
                           const std::string& needle) {
    write_text_file(f.path, content);
    try {
      read_corpus(f.path.string());
      FAIL("expected an exception for: ", content);
    } catch (const std::exception& e) {
      std::string what = e.what();
      CHECK(what.find(needle) != std::string::npos);
    }
  };

  std::string good =
      "{\"id\":\"a\",\"tokens\":[\"x\"],\"keyphrases\":[]}\n";
  expect_error(good + "not json\n", ":2:");
  expect_error("{\"id\":\"a\",\"tokens\":[\"x\"]}\n",
               "needs id, tokens, keyphrases");
  expect_error("{\"id\":\"\",\"tokens\":[\"x\"],\"keyphrases\":[]}\n",
               "non-empty string");
  expect_error(good + good, "duplicate document id a");
  expect_error("{\"id\":\"a\",\"tokens\":[],\"keyphrases\":[]}\n",
               "non-empty array");
  expect_error("{\"id\":\"a\",\"tokens\":[3],\"keyphrases\":[]}\n",
               "non-empty strings");
  expect_error("{\"id\":\"a\",\"tokens\":[\"x\"],\"keyphrases\":[[]]}\n",
               "non-empty array");
  CHECK_THROWS_AS(read_corpus("/nonexistent/corpus.jsonl"),
                  std::runtime_error);
}

TEST_CASE("empty lines are skipped") {
  TempFile f("blank");
  write_text_file(f.path,
                  "\n{\"id\":\"a\",\"tokens\":[\"x\"],\"keyphrases\":[]}\n\n");
  CHECK(read_corpus(f.path.string()).size() == 1);
}

TEST_CASE("the vocabulary lists specials then sorted words") {
  std::vector<CorpusRecord> records;
  records.push_back({"a", {"pear", "apple"}, {{"zeta", "apple"}}});
  Vocabulary vocab = build_vocabulary(records);
  CHECK(vocab.size() == kNumSpecials + 3);
  CHECK(vocab.word(kNumSpecials) == "apple");
  CHECK(vocab.word(kNumSpecials + 1) == "pear");
  CHECK(vocab.word(kNumSpecials + 2) == "zeta");
}

TEST_CASE("a word cap keeps the most frequent words") {
  std::vector<CorpusRecord> records;
  records.push_back(
      {"a", {"hi", "hi", "hi", "mid", "mid", "lo", "tie"}, {{"mid"}}});
  // counts: hi 3, mid 3 (text 2 + keyphrase 1), lo 1, tie 1

  Vocabulary capped = build_vocabulary(records, 3);
  CHECK(capped.size() == kNumSpecials + 3);
  CHECK(capped.id("hi") != capped.unk_id());
  CHECK(capped.id("mid") != capped.unk_id());
  CHECK(capped.id("lo") != capped.unk_id());  // count tie with "tie" breaks lex
  CHECK(capped.id("tie") == capped.unk_id());

  Vocabulary uncapped = build_vocabulary(records, 10);
  CHECK(uncapped.size() == kNumSpecials + 4);

  SourceDocument doc = document_from_record(records[0], capped);
  CHECK(doc.tokens.back() == capped.unk_id());
  CHECK(doc.tokens.front() == capped.id("hi"));
}

TEST_CASE("records map to id documents and phrases") {
  std::vector<CorpusRecord> records;
  records.push_back({"a", {"x", "y"}, {{"y", "x"}, {"x"}}});
  Vocabulary vocab = build_vocabulary(records);
  SourceDocument doc = document_from_record(records[0], vocab);
  CHECK(doc.id == "a");
  CHECK(doc.tokens == TokenSeq{vocab.id("x"), vocab.id("y")});
  auto phrases = keyphrase_ids(records[0], vocab);
  REQUIRE(phrases.size() == 2);
  CHECK(phrases[0] == TokenSeq{vocab.id("y"), vocab.id("x")});
  CHECK(phrases[1] == TokenSeq{vocab.id("x")});
}

TEST_CASE("oracle spec files round-trip") {
  OracleSpecFile spec;
  spec.params = {6.5, 2.0, 0.5, 42};
  spec.docs.push_back({"a", {{"x", "y"}}, {{"q"}}});
  spec.docs.push_back({"b", {}, {}});

  TempFile f("oracle");
  write_oracle_spec(f.path.string(), spec);
  OracleSpecFile loaded = read_oracle_spec(f.path.string());

  CHECK(loaded.params.attention_gain == 6.5);
  CHECK(loaded.params.end_bias == 2.0);
  CHECK(loaded.params.distractor_gain == 0.5);
  CHECK(loaded.params.seed == 42);
  REQUIRE(loaded.docs.size() == 2);
  CHECK(loaded.docs[0].doc_id == "a");
  CHECK(loaded.docs[0].present == spec.docs[0].present);
  CHECK(loaded.docs[0].absent == spec.docs[0].absent);
  CHECK(loaded.docs[1].present.empty());
}

TEST_CASE("oracle spec read errors") {
  TempFile f("oracle_err");
  write_text_file(f.path, "{\"id\":\"a\"}\n");
  CHECK_THROWS_WITH_AS(read_oracle_spec(f.path.string()),
                       doctest::Contains("header needs numeric"),
                       std::runtime_error);

  std::string header =
      "{\"attention_gain\":8,\"end_bias\":3,\"distractor_gain\":1,"
      "\"seed\":0}\n";
  write_text_file(f.path, header);
  CHECK_THROWS_WITH_AS(read_oracle_spec(f.path.string() + ".missing"),
                       doctest::Contains("cannot open"), std::runtime_error);

  write_text_file(f.path, "");
  CHECK_THROWS_WITH_AS(read_oracle_spec(f.path.string()),
                       doctest::Contains("missing oracle parameter header"),
                       std::runtime_error);

  write_text_file(f.path, header + "{\"id\":\"a\"}\n{\"id\":\"a\"}\n");
  CHECK_THROWS_WITH_AS(read_oracle_spec(f.path.string()),
                       doctest::Contains("duplicate document id a"),
                       std::runtime_error);
}

TEST_CASE("oracle phrases resolve against the vocabulary") {
  std::vector<CorpusRecord> records;
  records.push_back({"a", {"x", "y"}, {}});
  Vocabulary vocab = build_vocabulary(records);

  DocPhrases doc{"a", {{"x", "y"}}, {}};
  OracleParams params{7.0, 2.5, 0.75, 9};
  OracleSpec spec = resolve_oracle_spec(doc, params, vocab);
  REQUIRE(spec.planted_present.size() == 1);
  CHECK(spec.planted_present[0] == TokenSeq{vocab.id("x"), vocab.id("y")});
  CHECK(spec.planted_absent.empty());
  CHECK(spec.attention_gain == 7.0);
  CHECK(spec.end_bias == 2.5);
  CHECK(spec.distractor_gain == 0.75);
  CHECK(spec.seed == 9);

  DocPhrases unknown{"a", {{"nope"}}, {}};
  CHECK_THROWS_WITH_AS(resolve_oracle_spec(unknown, params, vocab),
                       doctest::Contains("not in vocabulary: nope"),
                       std::runtime_error);
}

TEST_CASE("generator parameters are validated") {
  GeneratorParams ok;
  CHECK_NOTHROW(ok.validate());

  auto broken = [](auto mutate) {
    GeneratorParams p;
    mutate(p);
    return p;
  };
  CHECK_THROWS_AS(
      broken([](GeneratorParams& p) { p.num_docs = 0; }).validate(),
      std::invalid_argument);
  CHECK_THROWS_AS(
      broken([](GeneratorParams& p) { p.word_pool = 20; }).validate(),
      std::invalid_argument);
  CHECK_THROWS_AS(
      broken([](GeneratorParams& p) { p.doc_len_max = p.doc_len_min - 1; })
          .validate(),
      std::invalid_argument);
  CHECK_THROWS_AS(
      broken([](GeneratorParams& p) { p.phrases_min = 0; }).validate(),
      std::invalid_argument);
  CHECK_THROWS_AS(
      broken([](GeneratorParams& p) { p.heavy_docs = p.num_docs + 1; })
          .validate(),
      std::invalid_argument);
  CHECK_THROWS_AS(broken([](GeneratorParams& p) {
                    p.heavy_docs = 1;
                    p.heavy_phrases_max = p.heavy_phrases_min - 1;
                  }).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      broken([](GeneratorParams& p) { p.max_phrase_len = 0; }).validate(),
      std::invalid_argument);
  CHECK_THROWS_AS(
      broken([](GeneratorParams& p) { p.absent_per_doc = -1; }).validate(),
      std::invalid_argument);
  CHECK_THROWS_AS(
      broken([](GeneratorParams& p) { p.attention_gain = 1.0; }).validate(),
      std::invalid_argument);
  CHECK_THROWS_AS(
      broken([](GeneratorParams& p) { p.end_bias = -0.1; }).validate(),
      std::invalid_argument);
  // phrase budget larger than half the content words
  CHECK_THROWS_AS(broken([](GeneratorParams& p) {
                    p.word_pool = 40;
                    p.phrases_max = 10;
                    p.max_phrase_len = 5;
                  }).validate(),
                  std::invalid_argument);
  CHECK_THROWS_AS(broken([](GeneratorParams& p) {
                    p.word_pool = 300;
                    p.absent_per_doc = 20;
                  }).validate(),
                  std::invalid_argument);
}

TEST_CASE("generated corpora are deterministic per seed") {
  GeneratorParams params;
  params.num_docs = 6;
  params.heavy_docs = 1;
  params.absent_per_doc = 1;
  GeneratedCorpus a = generate_corpus(params);
  GeneratedCorpus b = generate_corpus(params);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].id == b.records[i].id);
    CHECK(a.records[i].tokens == b.records[i].tokens);
    CHECK(a.records[i].keyphrases == b.records[i].keyphrases);
  }

  params.seed += 1;
  GeneratedCorpus c = generate_corpus(params);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    if (a.records[i].tokens != c.records[i].tokens) any_diff = true;
  }
  CHECK(any_diff);
}

TEST_CASE("generated documents have the promised shape") {
  GeneratorParams params;
  params.num_docs = 12;
  params.heavy_docs = 3;
  params.heavy_phrases_min = 12;
  params.heavy_phrases_max = 15;
  params.phrases_min = 2;
  params.phrases_max = 5;
  params.absent_per_doc = 2;
  params.seed = 77;
  GeneratedCorpus corpus = generate_corpus(params);

  REQUIRE(corpus.records.size() == 12);
  REQUIRE(corpus.oracle.docs.size() == 12);
  CHECK(corpus.oracle.params.attention_gain == params.attention_gain);
  CHECK(corpus.oracle.params.seed == params.seed);

  std::set<std::string> ids;
  for (std::size_t d = 0; d < corpus.records.size(); ++d) {
    const CorpusRecord& rec = corpus.records[d];
    const DocPhrases& oracle = corpus.oracle.docs[d];
    CHECK(rec.id == oracle.doc_id);
    CHECK(rec.id.size() == 4);
    CHECK(rec.id[0] == 'd');
    CHECK(ids.insert(rec.id).second);

    const bool heavy = d < static_cast<std::size_t>(params.heavy_docs);
    int lo = heavy ? params.heavy_phrases_min : params.phrases_min;
    int hi = heavy ? params.heavy_phrases_max : params.phrases_max;
    CHECK(static_cast<int>(oracle.present.size()) >= lo);
    CHECK(static_cast<int>(oracle.present.size()) <= hi);
    CHECK(static_cast<int>(oracle.absent.size()) == params.absent_per_doc);

    // keyphrases are the present phrases then the absent ones
    REQUIRE(rec.keyphrases.size() ==
            oracle.present.size() + oracle.absent.size());
    for (std::size_t p = 0; p < oracle.present.size(); ++p) {
      CHECK(rec.keyphrases[p] == oracle.present[p]);
    }
    for (std::size_t p = 0; p < oracle.absent.size(); ++p) {
      CHECK(rec.keyphrases[oracle.present.size() + p] == oracle.absent[p]);
    }

    // each present phrase occurs exactly once, with filler on both sides
    auto ranges = phrase_ranges(rec.tokens, oracle.present);
    REQUIRE(ranges.size() == oracle.present.size());
    CHECK(ranges.front().first >= 1);
    for (std::size_t r = 1; r < ranges.size(); ++r) {
      CHECK(ranges[r].first > ranges[r - 1].first + ranges[r - 1].second);
    }
    CHECK(ranges.back().first + ranges.back().second < rec.tokens.size());

    // phrase tokens are unique to their phrase occurrence
    std::map<std::string, int> occurrences;
    for (const std::string& tok : rec.tokens) occurrences[tok] += 1;
    std::set<std::string> phrase_words;
    int budget = 0;
    for (const auto& phrase : oracle.present) {
      CHECK(static_cast<int>(phrase.size()) <= params.max_phrase_len);
      budget += static_cast<int>(phrase.size());
      for (const std::string& tok : phrase) {
        CHECK(phrase_words.insert(tok).second);
        CHECK(occurrences[tok] == 1);
      }
    }

    // document length honors the range unless the phrase budget forces more
    int gaps = static_cast<int>(oracle.present.size()) + 1;
    int len = static_cast<int>(rec.tokens.size());
    CHECK(len >= budget + gaps);
    CHECK(len <= std::max(params.doc_len_max, budget + gaps));
    if (budget + gaps <= params.doc_len_min) {
      CHECK(len >= params.doc_len_min);
    }
    for (const auto& phrase : oracle.absent) {
      CHECK(static_cast<int>(phrase.size()) <= params.max_phrase_len);
    }
  }

  // absent phrase words never appear in any document's text
  std::set<std::string> text_words;
  for (const CorpusRecord& rec : corpus.records) {
    text_words.insert(rec.tokens.begin(), rec.tokens.end());
  }
  for (const DocPhrases& doc : corpus.oracle.docs) {
    for (const auto& phrase : doc.absent) {
      for (const std::string& tok : phrase) {
        CHECK(text_words.count(tok) == 0);
      }
    }
  }
}

TEST_CASE("a generated corpus survives the file formats") {
  GeneratorParams params;
  params.num_docs = 4;
  params.absent_per_doc = 1;
  params.seed = 5;
  GeneratedCorpus corpus = generate_corpus(params);

  TempFile cf("gen_corpus");
  TempFile of("gen_oracle");
  write_corpus(cf.path.string(), corpus.records);
  write_oracle_spec(of.path.string(), corpus.oracle);

  auto records = read_corpus(cf.path.string());
  OracleSpecFile oracle = read_oracle_spec(of.path.string());
  REQUIRE(records.size() == 4);
  REQUIRE(oracle.docs.size() == 4);

  Vocabulary vocab = build_vocabulary(records);
  for (std::size_t d = 0; d < records.size(); ++d) {
    OracleSpec spec =
        resolve_oracle_spec(oracle.docs[d], oracle.params, vocab);
    OracleModel model(vocab.size(), spec);
    SourceDocument doc = document_from_record(records[d], vocab);
    CHECK_NOTHROW(validate_step_output(model.step(doc, {}), vocab.size(),
                                       doc.tokens.size()));
  }
}
