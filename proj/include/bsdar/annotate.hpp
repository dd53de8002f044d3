#pragma once

#include <map>
#include <set>
#include <vector>

#include "bsdar/types.hpp"

namespace bsdar {

/**
 * N-grams of the source document whose positions all carry above-threshold
 * first-step attention, scored by the mean attention over the occurrence
 * positions they were extracted from. Duplicate n-grams keep the maximum
 * score. `annotated_words` is the union of tokens over all entries and
 * `max_score` the largest entry score (0 when empty).
 */
struct AttentionAnnotation {
  std::map<TokenSeq, double> entries;  // lexicographically ordered
  std::set<TokenId> annotated_words;
  double max_score = 0.0;
  double threshold = 0.0;  // tau the extraction used

  bool empty() const { return entries.empty(); }
};

/**
 * Nearest-rank percentile threshold: sorted[ceil(percentile/100 * n) - 1],
 * the rank clamped to [0, n-1]. Percentile 100 yields the maximum.
 * Throws std::invalid_argument on an empty vector.
 */
double attention_threshold(std::vector<double> values, double percentile);

// +1 where attention is strictly above tau, -1 elsewhere.
std::vector<int> binarize(const std::vector<double>& attention, double tau);

/**
 * Thresholds the attention at the given percentile, finds the maximal runs
 * of above-threshold positions, and emits every contiguous n-gram with
 * 1 <= n <= min(run length, max_ngram) inside each run. An empty annotation
 * (all positions at or below the threshold) is legal.
 */
AttentionAnnotation extract_annotations(const SourceDocument& doc,
                                        const std::vector<double>& attention,
                                        double percentile, int max_ngram);

}  // namespace bsdar
