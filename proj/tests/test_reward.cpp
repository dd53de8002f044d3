#include <doctest.h>

#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include "bsdar/reward.hpp"

using namespace bsdar;

namespace {

AttentionAnnotation annotation_of(
    const std::map<TokenSeq, double>& entries) {
  AttentionAnnotation annot;
  annot.entries = {entries.begin(), entries.end()};
  for (const auto& [ngram, score] : entries) {
    for (TokenId t : ngram) annot.annotated_words.insert(t);
    annot.max_score = std::max(annot.max_score, score);
  }
  return annot;
}

}  // namespace

TEST_CASE("word attention table averages over occurrences") {
  SourceDocument doc = make_document("w", {8, 9, 8});
  WordAttentionTable table = build_word_attention(doc, {0.2, 0.5, 0.4});
  CHECK(table.scores.at(8) == doctest::Approx(0.3));
  CHECK(table.scores.at(9) == doctest::Approx(0.5));
  CHECK(table.max_score == doctest::Approx(0.5));
}

TEST_CASE("unique words take their single position's attention") {
  SourceDocument doc = make_document("u", {3, 4, 5});
  WordAttentionTable table = build_word_attention(doc, {0.1, 0.6, 0.3});
  CHECK(table.scores.at(3) == doctest::Approx(0.1));
  CHECK(table.scores.at(4) == doctest::Approx(0.6));
  CHECK(table.scores.at(5) == doctest::Approx(0.3));
}

TEST_CASE("word attention table equals a brute-force grouping") {
  std::mt19937 gen(5);
  for (int trial = 0; trial < 30; ++trial) {
    std::size_t len = 1 + gen() % 40;
    TokenSeq tokens;
    for (std::size_t i = 0; i < len; ++i)
      tokens.push_back(static_cast<TokenId>(3 + gen() % 9));
    std::vector<double> att(len);
    double sum = 0.0;
    for (auto& a : att) {
      a = 1.0 + static_cast<double>(gen() % 100);
      sum += a;
    }
    for (auto& a : att) a /= sum;

    SourceDocument doc = make_document("g", tokens);
    WordAttentionTable table = build_word_attention(doc, att);

    std::map<TokenId, std::pair<double, int>> grouped;
    for (std::size_t p = 0; p < len; ++p) {
      auto& [s, n] = grouped[tokens[p]];
      s += att[p];
      n += 1;
    }
    REQUIRE(table.scores.size() == grouped.size());
    double max_score = 0.0;
    for (const auto& [w, sn] : grouped) {
      double mean = sn.first / sn.second;
      CHECK(table.scores.at(w) == doctest::Approx(mean).epsilon(1e-12));
      max_score = std::max(max_score, mean);
    }
    CHECK(table.max_score == doctest::Approx(max_score));
  }
}

TEST_CASE("word attention table rejects a length mismatch") {
  SourceDocument doc = make_document("m", {3, 4});
  CHECK_THROWS_AS(build_word_attention(doc, {0.5, 0.3, 0.2}),
                  std::invalid_argument);
}

TEST_CASE("word reward arithmetic on the spec example") {
  SourceDocument doc = make_document("a", {7, 8});
  // table: word 7 -> 0.3, word 8 -> 0.5 (max), gamma = 2*0.5 = 1.0
  WordAttentionTable table = build_word_attention(doc, {0.3, 0.5});
  std::vector<double> in{-4.0, -4.0, -4.0, -4.0, -4.0, -4.0, -4.0, -1.0, -2.0};
  std::vector<double> out = word_reward_augment(in, table, 2.0);
  CHECK(out[7] == doctest::Approx(-1.0 + 0.6 + 1.0));  // = 0.6
  CHECK(out[8] == doctest::Approx(-2.0 + 1.0 + 1.0));
  for (std::size_t i = 0; i < 7; ++i) CHECK(out[i] == in[i]);
  CHECK(in[7] == -1.0);  // input untouched
}

TEST_CASE("zero lambda leaves the scores bit-identical") {
  SourceDocument doc = make_document("z", {3, 4, 5});
  WordAttentionTable table = build_word_attention(doc, {0.2, 0.5, 0.3});
  std::vector<double> in{-0.123456, -7.5, -2.25, -1.0 / 3.0, -0.1, -9.0};
  std::vector<double> out = word_reward_augment(in, table, 0.0);
  CHECK(out == in);  // exact, including signs and representations
}

TEST_CASE("augmentation is strictly positive for source words") {
  SourceDocument doc = make_document("s", {3, 4, 5, 6});
  WordAttentionTable table =
      build_word_attention(doc, {0.1, 0.2, 0.3, 0.4});
  std::vector<double> in(8, -2.0);
  std::vector<double> out = word_reward_augment(in, table, 2.0);
  for (TokenId w : {3, 4, 5, 6})
    CHECK(out[static_cast<std::size_t>(w)] > in[static_cast<std::size_t>(w)]);
}

TEST_CASE("equal base scores order by word attention after augmentation") {
  std::mt19937 gen(17);
  for (int trial = 0; trial < 25; ++trial) {
    TokenSeq tokens;
    for (int i = 0; i < 6; ++i) tokens.push_back(3 + i);
    std::vector<double> att(6);
    double sum = 0.0;
    for (auto& a : att) {
      a = 1.0 + static_cast<double>(gen() % 50);
      sum += a;
    }
    for (auto& a : att) a /= sum;
    SourceDocument doc = make_document("o", tokens);
    WordAttentionTable table = build_word_attention(doc, att);
    std::vector<double> in(9, -3.0);
    std::vector<double> out = word_reward_augment(in, table, 2.0);
    for (TokenId a = 3; a < 9; ++a) {
      for (TokenId b = 3; b < 9; ++b) {
        if (table.scores.at(a) > table.scores.at(b)) {
          CHECK(out[static_cast<std::size_t>(a)] >
                out[static_cast<std::size_t>(b)]);
        }
      }
    }
  }
}

TEST_CASE("augmenting rejects a vocabulary smaller than the source words") {
  SourceDocument doc = make_document("v", {3, 12});
  WordAttentionTable table = build_word_attention(doc, {0.5, 0.5});
  std::vector<double> in(5, -1.0);  // word 12 out of range
  CHECK_THROWS_AS(word_reward_augment(in, table, 2.0), std::invalid_argument);
}

TEST_CASE("classify_sequence covers all four classes") {
  AttentionAnnotation annot = annotation_of({
      {{5}, 0.30},
      {{5, 6}, 0.45},
      {{5, 6, 7}, 0.40},
      {{9}, 0.20},
  });

  SeqClassification full = classify_sequence({5, 6}, annot);
  CHECK(full.cls == SeqClass::kFullMatch);
  CHECK(full.score == doctest::Approx(0.45));

  // entries hold every unigram of a run, so a first token is FULL_MATCH
  CHECK(classify_sequence({5}, annot).cls == SeqClass::kFullMatch);

  // proper prefix of an entry that is not an entry itself
  AttentionAnnotation sparse = annotation_of({{{5, 6, 7}, 0.4}});
  CHECK(classify_sequence({5}, sparse).cls == SeqClass::kPrefix);
  CHECK(classify_sequence({5, 6}, sparse).cls == SeqClass::kPrefix);

  // overlap without a match
  CHECK(classify_sequence({8, 5}, annot).cls == SeqClass::kPartial);
  CHECK(classify_sequence({6, 7}, annot).cls == SeqClass::kPartial);

  CHECK(classify_sequence({8, 3}, annot).cls == SeqClass::kNoOverlap);
}

TEST_CASE("classify_sequence of an empty sequence throws") {
  AttentionAnnotation annot = annotation_of({{{5}, 0.3}});
  CHECK_THROWS_AS(classify_sequence({}, annot), std::invalid_argument);
}

TEST_CASE("classification is exhaustive and mutually exclusive") {
  std::mt19937 gen(31);
  for (int trial = 0; trial < 40; ++trial) {
    std::map<TokenSeq, double> entries;
    int n_entries = 1 + static_cast<int>(gen() % 5);
    for (int e = 0; e < n_entries; ++e) {
      TokenSeq ngram;
      std::size_t n = 1 + gen() % 3;
      for (std::size_t i = 0; i < n; ++i)
        ngram.push_back(static_cast<TokenId>(3 + gen() % 5));
      entries[ngram] = 0.1 + static_cast<double>(gen() % 9) / 10.0;
    }
    AttentionAnnotation annot = annotation_of(entries);

    for (int q = 0; q < 30; ++q) {
      TokenSeq seq;
      std::size_t n = 1 + gen() % 4;
      for (std::size_t i = 0; i < n; ++i)
        seq.push_back(static_cast<TokenId>(3 + gen() % 7));
      SeqClassification c = classify_sequence(seq, annot);

      bool is_entry = annot.entries.count(seq) != 0;
      bool is_prefix = false;
      for (const auto& [ngram, score] : annot.entries) {
        if (ngram.size() > seq.size() &&
            std::equal(seq.begin(), seq.end(), ngram.begin()))
          is_prefix = true;
      }
      bool overlaps = false;
      for (TokenId t : seq)
        if (annot.annotated_words.count(t)) overlaps = true;

      if (is_entry) {
        CHECK(c.cls == SeqClass::kFullMatch);
        CHECK(c.score == doctest::Approx(annot.entries.at(seq)));
      } else if (is_prefix) {
        CHECK(c.cls == SeqClass::kPrefix);
      } else if (overlaps) {
        CHECK(c.cls == SeqClass::kPartial);
      } else {
        CHECK(c.cls == SeqClass::kNoOverlap);
      }
    }
  }
}

TEST_CASE("completion of a mid-phrase stop is partial") {
  AttentionAnnotation annot = annotation_of({
      {{5}, 0.30},
      {{5, 6}, 0.45},
  });
  // "5" is an entry but also a proper prefix of "5 6": stopping there is a
  // partially generated annotation
  CHECK(classify_completion({5}, annot).cls == SeqClass::kPartial);

  SeqClassification done = classify_completion({5, 6}, annot);
  CHECK(done.cls == SeqClass::kFullMatch);
  CHECK(done.score == doctest::Approx(0.45));

  CHECK(classify_completion({8}, annot).cls == SeqClass::kNoOverlap);
  // empty content passes through unpenalized
  CHECK(classify_completion({}, annot).cls == SeqClass::kNoOverlap);
}

TEST_CASE("ngram_adjust applies the reward formula on the spec example") {
  AttentionAnnotation annot = annotation_of({{{5, 6}, 0.45}});
  SeqClassification full{SeqClass::kFullMatch, 0.45};
  AdjustResult r = ngram_adjust(full, -1.0, 2.0, annot);
  CHECK(r.score == doctest::Approx(0.8));  // -1.0 + 0.9 + 0.9
  CHECK_FALSE(r.penalized);
}

TEST_CASE("ngram_adjust passes prefix and no-overlap through") {
  AttentionAnnotation annot = annotation_of({{{5, 6}, 0.45}});
  for (SeqClass cls : {SeqClass::kPrefix, SeqClass::kNoOverlap}) {
    AdjustResult r = ngram_adjust({cls, 0.0}, -2.3, 2.0, annot);
    CHECK(r.score == doctest::Approx(-2.3));
    CHECK_FALSE(r.penalized);
  }
}

TEST_CASE("ngram_adjust floors partial matches") {
  AttentionAnnotation annot = annotation_of({{{5, 6}, 0.45}});
  AdjustResult r = ngram_adjust({SeqClass::kPartial, 0.0}, -0.1, 2.0, annot);
  CHECK(r.score == kPenaltyFloor);
  CHECK(r.penalized);
}

TEST_CASE("zero lambda makes the full-match reward vanish exactly") {
  AttentionAnnotation annot = annotation_of({{{5}, 0.37}});
  AdjustResult r =
      ngram_adjust({SeqClass::kFullMatch, 0.37}, -1.724, 0.0, annot);
  CHECK(r.score == -1.724);  // exact: lambda scales both reward terms
  CHECK_FALSE(r.penalized);
}

TEST_CASE("penalized joint scores always rank below unpenalized ones") {
  // one floored step drags the mean at least 1e4/len below any real score
  Hypothesis penalized;
  penalized.step_scores = {-0.5, kPenaltyFloor};
  penalized.score_sum = -0.5 + kPenaltyFloor;
  Hypothesis ok;
  ok.step_scores = {-30.0, -30.0};
  ok.score_sum = -60.0;
  CHECK(joint_score(penalized) < joint_score(ok));
}
