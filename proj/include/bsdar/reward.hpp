#pragma once

#include <unordered_map>

#include "bsdar/annotate.hpp"
#include "bsdar/types.hpp"

namespace bsdar {

// Per-token log score assigned to penalized hypotheses. Every unpenalized
// log score produced by the models sits far above this, so a penalized
// hypothesis can never outrank an unpenalized one.
inline constexpr double kPenaltyFloor = -1e4;

/**
 * Mean attention per source word: table[w] is the mean of the attention
 * weights over every position where w occurs. `max_score` is the largest
 * table value (0 for an empty document table).
 */
struct WordAttentionTable {
  std::unordered_map<TokenId, double> scores;
  double max_score = 0.0;
};

WordAttentionTable build_word_attention(const SourceDocument& doc,
                                        const std::vector<double>& attention);

/**
 * Adds lambda * table[w] + gamma to the log score of every source word w,
 * with gamma = lambda * table.max_score. Non-source tokens are unchanged.
 * The input vector is not mutated. lambda = 0 is the identity.
 */
std::vector<double> word_reward_augment(const std::vector<double>& log_scores,
                                        const WordAttentionTable& table,
                                        double lambda);

enum class SeqClass {
  kFullMatch,  // the sequence is an annotation entry
  kPrefix,     // proper prefix of some entry, not an entry itself
  kPartial,    // shares tokens with the annotation without matching
  kNoOverlap,
};

struct SeqClassification {
  SeqClass cls = SeqClass::kNoOverlap;
  double score = 0.0;  // entry score, set for kFullMatch only
};

/**
 * Classifies a candidate sequence against the annotation. The sequence must
 * be non-empty with any trailing <end> already stripped. Order: entry match,
 * proper prefix of an entry, token overlap, no overlap.
 */
SeqClassification classify_sequence(const TokenSeq& seq,
                                    const AttentionAnnotation& annot);

/**
 * Classification for a candidate that ends the hypothesis: `content` is the
 * sequence without the final <end>. Content that is a proper prefix of a
 * longer entry counts as kPartial even when it is an entry itself; stopping
 * in the middle of an annotated phrase is a partially generated annotation,
 * not a match. Otherwise identical to classify_sequence.
 */
SeqClassification classify_completion(const TokenSeq& content,
                                      const AttentionAnnotation& annot);

struct AdjustResult {
  double score = 0.0;
  bool penalized = false;
};

/**
 * Applies the n-gram rule to one candidate's last-token log score:
 * full match s -> base + lambda*s + lambda*annot.max_score; prefix and
 * no-overlap pass through; partial -> kPenaltyFloor with the flag set.
 */
AdjustResult ngram_adjust(const SeqClassification& cls, double base_log_score,
                          double lambda, const AttentionAnnotation& annot);

}  // namespace bsdar
