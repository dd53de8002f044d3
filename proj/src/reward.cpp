#include "bsdar/reward.hpp"

#include <algorithm>
#include <stdexcept>

namespace bsdar {

WordAttentionTable build_word_attention(const SourceDocument& doc,
                                        const std::vector<double>& attention) {
  if (attention.size() != doc.tokens.size()) {
    throw std::invalid_argument("attention length does not match document");
  }
  WordAttentionTable table;
  table.scores.reserve(doc.position_index.size());
  for (const auto& [word, positions] : doc.position_index) {
    double sum = 0.0;
    for (int pos : positions) sum += attention[static_cast<size_t>(pos)];
    double mean = sum / static_cast<double>(positions.size());
    table.scores.emplace(word, mean);
    table.max_score = std::max(table.max_score, mean);
  }
  return table;
}

std::vector<double> word_reward_augment(const std::vector<double>& log_scores,
                                        const WordAttentionTable& table,
                                        double lambda) {
  std::vector<double> out = log_scores;
  const double gamma = lambda * table.max_score;
  for (const auto& [word, score] : table.scores) {
    auto idx = static_cast<size_t>(word);
    if (idx >= out.size()) {
      throw std::invalid_argument("source word outside vocabulary range");
    }
    out[idx] += lambda * score + gamma;
  }
  return out;
}

namespace {

// True when `seq` is a proper prefix of some annotation entry. Map keys are
// lexicographic, so every key extending seq sorts immediately after it;
// inspecting upper_bound(seq) suffices.
bool is_proper_prefix_of_entry(const TokenSeq& seq,
                               const AttentionAnnotation& annot) {
  auto it = annot.entries.upper_bound(seq);
  if (it == annot.entries.end()) return false;
  const TokenSeq& key = it->first;
  if (key.size() <= seq.size()) return false;
  return std::equal(seq.begin(), seq.end(), key.begin());
}

}  // namespace

SeqClassification classify_sequence(const TokenSeq& seq,
                                    const AttentionAnnotation& annot) {
  if (seq.empty()) throw std::invalid_argument("empty candidate sequence");
  if (auto it = annot.entries.find(seq); it != annot.entries.end()) {
    return {SeqClass::kFullMatch, it->second};
  }
  if (is_proper_prefix_of_entry(seq, annot)) {
    return {SeqClass::kPrefix, 0.0};
  }
  for (TokenId tok : seq) {
    if (annot.annotated_words.count(tok) != 0) {
      return {SeqClass::kPartial, 0.0};
    }
  }
  return {SeqClass::kNoOverlap, 0.0};
}

SeqClassification classify_completion(const TokenSeq& content,
                                      const AttentionAnnotation& annot) {
  if (content.empty()) return {SeqClass::kNoOverlap, 0.0};
  if (is_proper_prefix_of_entry(content, annot)) {
    return {SeqClass::kPartial, 0.0};
  }
  return classify_sequence(content, annot);
}

AdjustResult ngram_adjust(const SeqClassification& cls, double base_log_score,
                          double lambda, const AttentionAnnotation& annot) {
  switch (cls.cls) {
    case SeqClass::kFullMatch:
      return {base_log_score + lambda * cls.score + lambda * annot.max_score,
              false};
    case SeqClass::kPrefix:
    case SeqClass::kNoOverlap:
      return {base_log_score, false};
    case SeqClass::kPartial:
      return {kPenaltyFloor, true};
  }
  throw std::logic_error("unreachable");
}

}  // namespace bsdar
