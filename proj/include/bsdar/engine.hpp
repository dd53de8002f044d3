#pragma once

#include <string>
#include <vector>

#include "bsdar/search.hpp"

namespace bsdar {

struct DocumentResult {
  std::string doc_id;
  RankedPhrases phrases;
};

/** Serial reference: decodes documents one by one, in order. */
std::vector<DocumentResult> decode_corpus(
    const std::vector<SourceDocument>& docs, const StepModel& model,
    const DecodeConfig& cfg);

/**
 * Document-parallel decode. Results land at their document's index, so the
 * output equals the serial reference for any worker count. workers <= 0
 * falls back to the BSDAR_WORKERS environment variable, then to the
 * hardware default.
 */
std::vector<DocumentResult> decode_corpus_parallel(
    const std::vector<SourceDocument>& docs, const StepModel& model,
    const DecodeConfig& cfg, int workers = 0);

/** BSDAR_WORKERS as a positive worker count; 0 when unset or unusable. */
int worker_count_from_env();

}  // namespace bsdar
