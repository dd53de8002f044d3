#pragma once

#include <cstdint>
#include <vector>

#include "bsdar/annotate.hpp"
#include "bsdar/model.hpp"
#include "bsdar/reward.hpp"
#include "bsdar/types.hpp"

namespace bsdar {

/** One final prediction: phrase content (no `<end>`) and its joint score. */
struct RankedPhrase {
  TokenSeq tokens;
  double score = 0.0;
  bool penalized = false;
};
using RankedPhrases = std::vector<RankedPhrase>;

/** One proposed extension of a live hypothesis. */
struct Candidate {
  int parent_index = -1;  // index into the live list of the current step
  TokenId token = 0;
  double step_score = 0.0;  // last-token log score after any adjustment
  bool penalized = false;
};

/**
 * Top-`width` tokens by raw log score, ties broken by token id. Used by the
 * BS and BS++ modes.
 */
std::vector<Candidate> expand_plain(const StepOutput& out, int width,
                                    int parent_index);

/**
 * Attention-rewarded expansion: augments the log scores with the word
 * reward built from this step's attention, takes the top `width` tokens,
 * then classifies each candidate's full token sequence against the
 * annotation and applies the n-gram reward or penalty to its last-token
 * score. Candidates come back re-sorted by adjusted score. A penalized
 * parent's candidates are all floored.
 */
std::vector<Candidate> expand_rewarded(const Hypothesis& parent,
                                       int parent_index,
                                       const SourceDocument& doc,
                                       const StepOutput& out, int width,
                                       const AttentionAnnotation& annot,
                                       double lambda);

/** Keeps the `keep` best of one parent's candidates by last-token score. */
std::vector<Candidate> pre_intra_rank(std::vector<Candidate> cands, int keep);

/** A completed hypothesis reduced to what final ranking needs. */
struct CompletedEntry {
  TokenSeq content;
  double joint = 0.0;
  bool penalized = false;
  std::int64_t parent_id = -1;
};

/** Ranking order: joint score descending, then content lexicographic. */
bool entry_before(const CompletedEntry& a, const CompletedEntry& b);

/**
 * Keeps the `keep` best completions within each (parent, phrase length)
 * group; output sorted by entry_before.
 */
std::vector<CompletedEntry> post_intra_rerank(std::vector<CompletedEntry> entries,
                                              int keep);

/**
 * Caps each first token at `keep` head slots; the overflow is demoted after
 * every head entry rather than dropped, so deep retrieval windows still see
 * it. Both segments stay sorted by entry_before.
 */
std::vector<CompletedEntry> post_inter_rerank(std::vector<CompletedEntry> entries,
                                              int keep);

/** The annotation a BSDAR decode of this document would use (t=0 attention). */
AttentionAnnotation annotation_from_model(const StepModel& model,
                                          const SourceDocument& doc,
                                          const DecodeConfig& cfg);

/**
 * Beam-search decode of one document under cfg.mode. Deterministic: equal
 * inputs give equal output, all tie-breaks lexicographic. Model step errors
 * propagate with the document id prepended.
 */
RankedPhrases decode(const StepModel& model, const SourceDocument& doc,
                     const DecodeConfig& cfg);

}  // namespace bsdar
