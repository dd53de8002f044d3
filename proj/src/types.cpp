#include "bsdar/types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bsdar {

Vocabulary::Vocabulary() {
  add(kStartToken);
  add(kEndToken);
  add(kUnkToken);
}

Vocabulary::Vocabulary(const std::vector<std::string>& words) : Vocabulary() {
  for (const auto& w : words) add(w);
}

TokenId Vocabulary::add(const std::string& word) {
  auto it = index_.find(word);
  if (it != index_.end()) return it->second;
  TokenId id = static_cast<TokenId>(words_.size());
  words_.push_back(word);
  index_.emplace(word, id);
  return id;
}

TokenId Vocabulary::id(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? unk_id() : it->second;
}

const std::string& Vocabulary::word(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= words_.size())
    throw std::out_of_range("token id " + std::to_string(id) +
                            " outside vocabulary of size " +
                            std::to_string(words_.size()));
  return words_[static_cast<std::size_t>(id)];
}

bool Vocabulary::contains(const std::string& word) const {
  return index_.count(word) != 0;
}

std::unordered_map<TokenId, std::vector<int>> build_position_index(
    const TokenSeq& tokens) {
  if (tokens.empty()) throw std::invalid_argument("empty document");
  std::unordered_map<TokenId, std::vector<int>> index;
  for (int p = 0; p < static_cast<int>(tokens.size()); ++p)
    index[tokens[static_cast<std::size_t>(p)]].push_back(p);
  return index;
}

SourceDocument make_document(std::string id, TokenSeq tokens) {
  SourceDocument doc;
  doc.id = std::move(id);
  doc.position_index = build_position_index(tokens);
  doc.tokens = std::move(tokens);
  return doc;
}

void validate_step_output(const StepOutput& out, std::size_t vocab_size,
                          std::size_t doc_len) {
  if (out.log_scores.size() != vocab_size)
    throw std::invalid_argument(
        "step output has " + std::to_string(out.log_scores.size()) +
        " log scores for a vocabulary of " + std::to_string(vocab_size));
  for (double s : out.log_scores)
    if (!std::isfinite(s))
      throw std::invalid_argument("non-finite log score in step output");
  if (out.attention.size() != doc_len)
    throw std::invalid_argument(
        "step output has " + std::to_string(out.attention.size()) +
        " attention weights for a document of length " +
        std::to_string(doc_len));
  double sum = 0.0;
  for (double a : out.attention) {
    if (a < 0.0) throw std::invalid_argument("negative attention weight");
    sum += a;
  }
  if (std::fabs(sum - 1.0) > 1e-6)
    throw std::invalid_argument("attention weights sum to " +
                                std::to_string(sum) + ", expected 1");
}

double joint_score(const Hypothesis& hyp) {
  if (hyp.step_scores.empty())
    throw std::invalid_argument("joint score of an empty hypothesis");
  return hyp.score_sum / static_cast<double>(hyp.step_scores.size());
}

const char* mode_name(DecodeMode mode) {
  switch (mode) {
    case DecodeMode::kBs: return "bs";
    case DecodeMode::kBsPlus: return "bs++";
    case DecodeMode::kBsdar: return "bsdar";
  }
  return "?";
}

DecodeMode mode_from_name(const std::string& name) {
  if (name == "bs") return DecodeMode::kBs;
  if (name == "bs++") return DecodeMode::kBsPlus;
  if (name == "bsdar") return DecodeMode::kBsdar;
  throw std::invalid_argument("unknown decode mode '" + name +
                              "' (expected bs, bs++ or bsdar)");
}

void DecodeConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (beam_size < 1) fail("beam_size must be >= 1");
  if (beam_size_t0 < beam_size) fail("beam_size_t0 must be >= beam_size");
  if (num_hyps < beam_size_t0) fail("num_hyps must be >= beam_size_t0");
  if (max_steps < 1) fail("max_steps must be >= 1");
  if (percentile < 0.0 || percentile > 100.0)
    fail("percentile must lie in [0, 100]");
  if (max_ngram < 1) fail("max_ngram must be >= 1");
  if (pre_intra_top < 1) fail("pre_intra_top must be >= 1");
  if (post_intra_top < 1) fail("post_intra_top must be >= 1");
  if (post_inter_top < 1) fail("post_inter_top must be >= 1");
}

bool lex_less(const TokenSeq& a, const TokenSeq& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace bsdar
