#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace bsdar {

using TokenId = int;
using TokenSeq = std::vector<TokenId>;

inline constexpr const char* kStartToken = "<start>";
inline constexpr const char* kEndToken = "<end>";
inline constexpr const char* kUnkToken = "<unk>";

// The specials' fixed ids, in vocabulary construction order.
inline constexpr TokenId kStartId = 0;
inline constexpr TokenId kEndId = 1;
inline constexpr TokenId kUnkId = 2;
inline constexpr int kNumSpecials = 3;

/**
 * Dense token index. The three specials occupy ids 0..2 in construction
 * order; every word added afterwards gets the next free id. Lookup of an
 * unknown word maps to <unk>.
 */
class Vocabulary {
 public:
  Vocabulary();
  explicit Vocabulary(const std::vector<std::string>& words);

  TokenId add(const std::string& word);
  TokenId id(const std::string& word) const;
  const std::string& word(TokenId id) const;
  bool contains(const std::string& word) const;
  std::size_t size() const { return words_.size(); }

  TokenId start_id() const { return 0; }
  TokenId end_id() const { return 1; }
  TokenId unk_id() const { return 2; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, TokenId> index_;
};

/**
 * Maps each word to the ascending list of positions where it occurs.
 * The position lists jointly cover 0..tokens.size()-1.
 * Throws std::invalid_argument on an empty document.
 */
std::unordered_map<TokenId, std::vector<int>> build_position_index(const TokenSeq& tokens);

struct SourceDocument {
  std::string id;
  TokenSeq tokens;  // length T_x >= 1
  std::unordered_map<TokenId, std::vector<int>> position_index;
};

SourceDocument make_document(std::string id, TokenSeq tokens);

/**
 * One decoder step of some model: a full-vocabulary vector of log scores
 * plus an attention distribution over the source positions.
 */
struct StepOutput {
  std::vector<double> log_scores;  // size |V|, all finite
  std::vector<double> attention;   // size T_x, entries >= 0, sums to 1 within 1e-6
};

// Throws std::invalid_argument when the shapes or invariants are violated.
void validate_step_output(const StepOutput& out, std::size_t vocab_size,
                          std::size_t doc_len);

/**
 * A partial or completed decode path. `tokens` excludes <start>; a completed
 * hypothesis carries <end> as its last token and is never extended again.
 * `step_scores` holds the adjusted per-token log scores, one per token, and
 * `score_sum` is their running sum. Once `penalized` is set every later step
 * score is the penalty floor.
 */
struct Hypothesis {
  TokenSeq tokens;
  std::vector<double> step_scores;
  double score_sum = 0.0;
  std::int64_t id = -1;
  std::int64_t parent_id = -1;
  bool penalized = false;
  bool completed = false;
};

// Length-normalized joint score: mean of the per-token log scores, the
// <end> step included. Throws std::invalid_argument for an empty hypothesis.
double joint_score(const Hypothesis& hyp);

enum class DecodeMode { kBs, kBsPlus, kBsdar };

const char* mode_name(DecodeMode mode);
DecodeMode mode_from_name(const std::string& name);  // "bs" | "bs++" | "bsdar"

struct DecodeConfig {
  int beam_size_t0 = 100;  // expansion width at the first step
  int beam_size = 50;      // expansion width afterwards; also the results target
  int num_hyps = 200;      // retained candidate pool per step
  int max_steps = 6;       // longest phrase (5) plus <end>
  double lambda = 2.0;     // reward weight; 0 disables both reward kinds
  double penalty_prob = -0.05;  // nominal penalty; realized as the log-domain floor
  double percentile = 10.0;     // attention threshold percentile for annotation
  int max_ngram = 5;
  int pre_intra_top = 3;   // kept candidates per parent at each step (bs++/bsdar)
  int post_intra_top = 1;  // kept completed per (parent, length) group
  int post_inter_top = 5;  // head-ranked completed per shared first token
  DecodeMode mode = DecodeMode::kBs;

  // Throws std::invalid_argument when a field is out of range
  // (counts >= 1, beam_size <= beam_size_t0 <= num_hyps, percentile in [0,100]).
  void validate() const;
};

// Lexicographic order on token sequences; the deterministic tie-break used
// everywhere a sort key ties.
bool lex_less(const TokenSeq& a, const TokenSeq& b);

}  // namespace bsdar
