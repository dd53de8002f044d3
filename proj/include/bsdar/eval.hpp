#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "bsdar/search.hpp"
#include "bsdar/types.hpp"

namespace bsdar {

/** Gold phrases of one document, split into present and absent. */
struct GoldSet {
  std::string doc_id;
  std::vector<TokenSeq> phrases;
  std::vector<bool> present;  // phrase occurs contiguously in the document
};

bool contains_contiguous(const TokenSeq& hay, const TokenSeq& needle);

GoldSet split_present_absent(const SourceDocument& doc,
                             const std::vector<TokenSeq>& phrases);

struct RecallCounts {
  long matched = 0;
  long total = 0;
};

/** Exact-match counts of gold phrases found in the top-k predictions. */
RecallCounts recall_counts(const RankedPhrases& preds,
                           const std::vector<TokenSeq>& gold, int k);

/** Single-document R@k; empty gold is undefined and throws. */
double recall_at_k(const RankedPhrases& preds,
                   const std::vector<TokenSeq>& gold, int k);

/**
 * Corpus R@k with pooled counts (sum of matches over sum of golds), not a
 * per-document mean. Documents with empty gold are excluded.
 */
double micro_avg_recall(const std::vector<RankedPhrases>& preds,
                        const std::vector<std::vector<TokenSeq>>& golds,
                        int k);

/** LCS-based F1 between two phrases; 0 when the LCS is empty. */
double rouge_l_f1(const TokenSeq& pred, const TokenSeq& gold);

/**
 * Mean over every gold phrase of its best rouge_l_f1 against the document's
 * prediction list. Documents with empty gold are excluded.
 */
double corpus_rouge_l(const std::vector<RankedPhrases>& preds,
                      const std::vector<std::vector<TokenSeq>>& golds);

/** Distinct first tokens over phrase count; errors on an empty list. */
double diversity_score(const std::vector<TokenSeq>& phrases);

// Predictions per document entering the report's diversity pool; matches the
// operating beam size.
inline constexpr int kDiversityWindow = 50;

struct ModeMetrics {
  std::string mode;
  std::map<int, double> recall_all;
  std::map<int, double> recall_present;
  std::map<int, double> recall_absent;
  double rouge = 0.0;
  double diversity = 0.0;
};

struct MetricsReport {
  long docs_evaluated = 0;
  long docs_skipped = 0;  // documents with no gold phrases
  long gold_total = 0;
  long gold_present = 0;
  long gold_absent = 0;
  double gold_diversity = 0.0;
  std::vector<int> ks;
  std::vector<ModeMetrics> modes;
};

/**
 * Full report over one corpus: docs and golds are index-aligned;
 * mode_results maps a mode name to per-document predictions in the same
 * document order. Diversity pools the top kDiversityWindow predictions of
 * every evaluated document.
 */
MetricsReport compute_metrics(
    const std::vector<SourceDocument>& docs,
    const std::vector<std::vector<TokenSeq>>& golds,
    const std::vector<std::pair<std::string, std::vector<RankedPhrases>>>&
        mode_results,
    const std::vector<int>& ks);

/** Flat key-value table for humans; floats with 6 decimals. */
std::string format_metrics_table(const MetricsReport& report);

/** Line-delimited records, one per decoder mode; floats with 6 decimals. */
std::string metrics_records(const MetricsReport& report);

}  // namespace bsdar
