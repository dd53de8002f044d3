#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "bsdar/types.hpp"

namespace bsdar {

/**
 * One decoding step: log-probabilities over the vocabulary plus the source
 * attention for the given (document, prefix). Implementations are
 * deterministic and read-only after construction, so one model instance may
 * serve concurrent decoders.
 */
class StepModel {
 public:
  virtual ~StepModel() = default;
  virtual StepOutput step(const SourceDocument& doc,
                          const TokenSeq& prefix) const = 0;
  virtual int vocab_size() const = 0;
};

/**
 * Parameters of the synthetic oracle. Planted present phrases occur
 * contiguously in the document; planted absent phrases occur nowhere in it.
 * attention_gain c concentrates attention on present-phrase positions and is
 * the raw score of phrase continuations; end_bias e is the raw score of
 * `<end>` after a complete phrase (e/2 elsewhere, which manufactures the
 * end-of-sequence bias when e is large); distractor_gain d is the raw score
 * of a fixed seeded set of ten distractor tokens.
 */
struct OracleSpec {
  std::vector<TokenSeq> planted_present;
  std::vector<TokenSeq> planted_absent;
  double attention_gain = 8.0;
  double end_bias = 3.0;
  double distractor_gain = 1.0;
  std::uint32_t seed = 0;
};

inline constexpr int kOracleDistractors = 10;

class OracleModel : public StepModel {
 public:
  // max_prefix_len guards against callers running past the decoder's step
  // budget; step() rejects longer prefixes.
  OracleModel(int vocab_size, OracleSpec spec, int max_prefix_len = 6);

  StepOutput step(const SourceDocument& doc,
                  const TokenSeq& prefix) const override;
  int vocab_size() const override { return vocab_size_; }
  const std::vector<TokenId>& distractors() const { return distractors_; }
  const OracleSpec& spec() const { return spec_; }

 private:
  int vocab_size_;
  OracleSpec spec_;
  int max_prefix_len_;
  std::vector<TokenId> distractors_;
};

// Log scores a trace file leaves implicit: entries at or below the floor are
// dropped on write and restored as exactly this value on read.
inline constexpr double kTraceFloor = -20.0;

/** Recorded step outputs for one document, keyed by prefix. */
struct TraceData {
  std::map<TokenSeq, StepOutput> steps;
  int vocab_size = 0;
};

/** Replays a recorded trace; unknown prefixes are an error naming the prefix. */
class TraceModel : public StepModel {
 public:
  explicit TraceModel(TraceData data);

  StepOutput step(const SourceDocument& doc,
                  const TokenSeq& prefix) const override;
  int vocab_size() const override { return data_.vocab_size; }
  const TraceData& data() const { return data_; }

 private:
  TraceData data_;
};

TraceData load_trace(const std::string& path, int vocab_size);
void write_trace(const std::string& path, const TraceData& data);

/**
 * Pass-through wrapper that records every step output it serves, for trace
 * dumps. Mutates its cache on step(), so unlike the other models it must not
 * be shared across threads.
 */
class RecordingModel : public StepModel {
 public:
  explicit RecordingModel(const StepModel& inner) : inner_(inner) {}

  StepOutput step(const SourceDocument& doc,
                  const TokenSeq& prefix) const override;
  int vocab_size() const override { return inner_.vocab_size(); }

  TraceData recorded() const;

 private:
  const StepModel& inner_;
  mutable std::map<TokenSeq, StepOutput> steps_;
};

/** Routes steps to per-document oracles by document id. */
class OracleSetModel : public StepModel {
 public:
  void add(const std::string& doc_id, OracleModel model);

  StepOutput step(const SourceDocument& doc,
                  const TokenSeq& prefix) const override;
  int vocab_size() const override { return vocab_size_; }
  bool has_document(const std::string& doc_id) const;

 private:
  std::map<std::string, OracleModel> oracles_;
  int vocab_size_ = 0;
};

/** Routes steps to per-document traces by document id. */
class TraceSetModel : public StepModel {
 public:
  void add(const std::string& doc_id, TraceData data);

  StepOutput step(const SourceDocument& doc,
                  const TokenSeq& prefix) const override;
  int vocab_size() const override { return vocab_size_; }
  bool has_document(const std::string& doc_id) const;

 private:
  std::map<std::string, TraceModel> traces_;
  int vocab_size_ = 0;
};

}  // namespace bsdar
