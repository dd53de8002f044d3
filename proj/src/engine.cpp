#include "bsdar/engine.hpp"

#include <cstdlib>
#include <exception>

#include <omp.h>

namespace bsdar {

std::vector<DocumentResult> decode_corpus(
    const std::vector<SourceDocument>& docs, const StepModel& model,
    const DecodeConfig& cfg) {
  std::vector<DocumentResult> out;
  out.reserve(docs.size());
  for (const SourceDocument& doc : docs) {
    out.push_back({doc.id, decode(model, doc, cfg)});
  }
  return out;
}

std::vector<DocumentResult> decode_corpus_parallel(
    const std::vector<SourceDocument>& docs, const StepModel& model,
    const DecodeConfig& cfg, int workers) {
  if (workers <= 0) workers = worker_count_from_env();
  if (workers <= 0) workers = omp_get_max_threads();

  std::vector<DocumentResult> out(docs.size());
  std::exception_ptr first_error = nullptr;
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (long i = 0; i < static_cast<long>(docs.size()); ++i) {
    try {
      auto idx = static_cast<size_t>(i);
      out[idx] = {docs[idx].id, decode(model, docs[idx], cfg)};
    } catch (...) {
#pragma omp critical
      if (first_error == nullptr) first_error = std::current_exception();
    }
  }
  if (first_error != nullptr) std::rethrow_exception(first_error);
  return out;
}

int worker_count_from_env() {
  const char* env = std::getenv("BSDAR_WORKERS");
  if (env == nullptr) return 0;
  char* end = nullptr;
  long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1 || v > 1024) return 0;
  return static_cast<int>(v);
}

}  // namespace bsdar
