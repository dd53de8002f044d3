#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bsdar/model.hpp"
#include "bsdar/types.hpp"

namespace bsdar {

/** One corpus line: document id, source tokens, gold keyphrases. */
struct CorpusRecord {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<std::vector<std::string>> keyphrases;
};

/**
 * Reads line-delimited records {"id", "tokens", "keyphrases"}; tokens are
 * lowercased. Errors carry path and line number; duplicate ids name the id.
 */
std::vector<CorpusRecord> read_corpus(const std::string& path);
void write_corpus(const std::string& path,
                  const std::vector<CorpusRecord>& records);

/**
 * Specials plus every distinct token from document text and keyphrases, in
 * lexicographic order. A non-zero word_cap keeps only the word_cap most
 * frequent words (ties lexicographic); everything else maps to `<unk>`.
 */
Vocabulary build_vocabulary(const std::vector<CorpusRecord>& records,
                            std::size_t word_cap = 0);

SourceDocument document_from_record(const CorpusRecord& rec,
                                    const Vocabulary& vocab);
std::vector<TokenSeq> keyphrase_ids(const CorpusRecord& rec,
                                    const Vocabulary& vocab);

/** Oracle parameters shared by every document of a corpus. */
struct OracleParams {
  double attention_gain = 8.0;
  double end_bias = 3.0;
  double distractor_gain = 1.0;
  std::uint32_t seed = 0;
};

/** Planted phrases of one document, as token strings. */
struct DocPhrases {
  std::string doc_id;
  std::vector<std::vector<std::string>> present;
  std::vector<std::vector<std::string>> absent;
};

/**
 * Oracle description for a whole corpus: a parameter header line followed by
 * one line of planted phrases per document. Phrases are stored as token
 * strings, so the file stays valid under any vocabulary id assignment.
 */
struct OracleSpecFile {
  OracleParams params;
  std::vector<DocPhrases> docs;
};

OracleSpecFile read_oracle_spec(const std::string& path);
void write_oracle_spec(const std::string& path, const OracleSpecFile& spec);

/** Token-index OracleSpec for one document; unknown tokens are an error. */
OracleSpec resolve_oracle_spec(const DocPhrases& doc,
                               const OracleParams& params,
                               const Vocabulary& vocab);

/**
 * Synthetic corpus control knobs. Documents are random filler with planted
 * phrases spliced in, at least one filler token between phrases; a phrase's
 * tokens appear nowhere else in its document, so each planted phrase occurs
 * exactly once. The first heavy_docs documents carry the heavy phrase-count
 * range, giving the corpus a mix of light and dense documents. Absent
 * phrases draw from a reserved word range no document text ever uses.
 */
struct GeneratorParams {
  int num_docs = 100;
  int word_pool = 997;  // word strings "t0".."t{word_pool-1}"
  int doc_len_min = 40;
  int doc_len_max = 60;
  int phrases_min = 4;
  int phrases_max = 10;
  int heavy_docs = 0;
  int heavy_phrases_min = 25;
  int heavy_phrases_max = 32;
  int max_phrase_len = 5;
  int absent_per_doc = 0;
  double attention_gain = 8.0;
  double end_bias = 3.0;
  double distractor_gain = 1.0;
  std::uint32_t seed = 1;

  void validate() const;
};

struct GeneratedCorpus {
  std::vector<CorpusRecord> records;
  OracleSpecFile oracle;
};

GeneratedCorpus generate_corpus(const GeneratorParams& params);

}  // namespace bsdar
