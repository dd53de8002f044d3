#include "bsdar/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace bsdar {

namespace {

void check_phrases(const std::vector<TokenSeq>& phrases, int vocab_size,
                   const char* kind) {
  for (const TokenSeq& p : phrases) {
    if (p.empty()) {
      throw std::invalid_argument(std::string(kind) + " phrase is empty");
    }
    for (TokenId tok : p) {
      if (tok < kNumSpecials || tok >= vocab_size) {
        throw std::invalid_argument(std::string(kind) +
                                    " phrase token outside word range");
      }
    }
  }
}

// Seeded draw of `count` distinct non-special token ids. Uses raw engine
// output so the choice is identical across standard library implementations.
std::vector<TokenId> pick_distractors(int vocab_size, std::uint32_t seed,
                                      int count) {
  std::vector<TokenId> pool(static_cast<size_t>(vocab_size - kNumSpecials));
  std::iota(pool.begin(), pool.end(), kNumSpecials);
  std::mt19937 gen(seed);
  const auto n = std::min<size_t>(static_cast<size_t>(count), pool.size());
  for (size_t i = 0; i < n; ++i) {
    size_t j = i + static_cast<size_t>(gen() % (pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(n);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::vector<double> log_softmax(const std::vector<double>& raw) {
  double max_raw = *std::max_element(raw.begin(), raw.end());
  double sum = 0.0;
  for (double r : raw) sum += std::exp(r - max_raw);
  double log_z = max_raw + std::log(sum);
  std::vector<double> out(raw.size());
  for (size_t i = 0; i < raw.size(); ++i) out[i] = raw[i] - log_z;
  return out;
}

std::string format_prefix(const TokenSeq& prefix) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < prefix.size(); ++i) {
    if (i != 0) os << ' ';
    os << prefix[i];
  }
  os << ']';
  return os.str();
}

}  // namespace

OracleModel::OracleModel(int vocab_size, OracleSpec spec, int max_prefix_len)
    : vocab_size_(vocab_size),
      spec_(std::move(spec)),
      max_prefix_len_(max_prefix_len) {
  if (vocab_size_ <= kNumSpecials) {
    throw std::invalid_argument("vocabulary holds no word tokens");
  }
  if (max_prefix_len_ < 1) {
    throw std::invalid_argument("max_prefix_len must be at least 1");
  }
  check_phrases(spec_.planted_present, vocab_size_, "planted present");
  check_phrases(spec_.planted_absent, vocab_size_, "planted absent");
  if (spec_.attention_gain <= 1.0) {
    throw std::invalid_argument("attention_gain must exceed 1");
  }
  if (spec_.end_bias < 0.0) {
    throw std::invalid_argument("end_bias must be non-negative");
  }
  distractors_ = pick_distractors(vocab_size_, spec_.seed, kOracleDistractors);
}

StepOutput OracleModel::step(const SourceDocument& doc,
                             const TokenSeq& prefix) const {
  if (static_cast<int>(prefix.size()) >= max_prefix_len_) {
    throw std::invalid_argument("oracle prefix too long: " +
                                format_prefix(prefix));
  }

  // Attention depends only on the document: weight c inside any occurrence
  // of a planted present phrase, 1 elsewhere, normalized.
  std::vector<double> attention(doc.tokens.size(), 1.0);
  for (const TokenSeq& phrase : spec_.planted_present) {
    if (phrase.size() > doc.tokens.size()) continue;
    for (size_t start = 0; start + phrase.size() <= doc.tokens.size();
         ++start) {
      if (std::equal(phrase.begin(), phrase.end(),
                     doc.tokens.begin() + static_cast<long>(start))) {
        for (size_t k = 0; k < phrase.size(); ++k) {
          attention[start + k] = spec_.attention_gain;
        }
      }
    }
  }
  double total = std::accumulate(attention.begin(), attention.end(), 0.0);
  for (double& a : attention) a /= total;

  std::vector<double> raw(static_cast<size_t>(vocab_size_), 0.0);
  for (TokenId d : distractors_) {
    raw[static_cast<size_t>(d)] = spec_.distractor_gain;
  }

  bool at_complete_phrase = false;
  for (const TokenSeq& phrase : spec_.planted_present) {
    if (phrase == prefix) at_complete_phrase = true;
  }
  for (const TokenSeq& phrase : spec_.planted_absent) {
    if (phrase == prefix) at_complete_phrase = true;
  }
  raw[static_cast<size_t>(kEndId)] =
      at_complete_phrase ? spec_.end_bias : 0.5 * spec_.end_bias;

  // Continuations overwrite: a phrase whose first |prefix| tokens equal the
  // prefix promotes its next token.
  auto promote = [&](const TokenSeq& phrase) {
    if (prefix.size() >= phrase.size()) return;
    if (!std::equal(prefix.begin(), prefix.end(), phrase.begin())) return;
    raw[static_cast<size_t>(phrase[prefix.size()])] = spec_.attention_gain;
  };
  for (const TokenSeq& phrase : spec_.planted_present) promote(phrase);
  for (const TokenSeq& phrase : spec_.planted_absent) promote(phrase);

  StepOutput out{log_softmax(raw), std::move(attention)};
  return out;
}

TraceModel::TraceModel(TraceData data) : data_(std::move(data)) {
  if (data_.vocab_size <= 0) {
    throw std::invalid_argument("trace vocab_size must be positive");
  }
  if (data_.steps.find(TokenSeq{}) == data_.steps.end()) {
    throw std::invalid_argument("trace lacks the empty-prefix record");
  }
  for (const auto& [prefix, out] : data_.steps) {
    if (out.log_scores.size() != static_cast<size_t>(data_.vocab_size)) {
      throw std::invalid_argument("trace record at " + format_prefix(prefix) +
                                  " has wrong log_scores size");
    }
  }
}

StepOutput TraceModel::step(const SourceDocument&,
                            const TokenSeq& prefix) const {
  auto it = data_.steps.find(prefix);
  if (it == data_.steps.end()) {
    throw std::runtime_error("trace has no record for prefix " +
                             format_prefix(prefix));
  }
  return it->second;
}

StepOutput RecordingModel::step(const SourceDocument& doc,
                                const TokenSeq& prefix) const {
  auto it = steps_.find(prefix);
  if (it != steps_.end()) return it->second;
  StepOutput out = inner_.step(doc, prefix);
  steps_.emplace(prefix, out);
  return out;
}

TraceData RecordingModel::recorded() const {
  return TraceData{steps_, inner_.vocab_size()};
}

void OracleSetModel::add(const std::string& doc_id, OracleModel model) {
  if (oracles_.count(doc_id) != 0) {
    throw std::invalid_argument("duplicate oracle for document " + doc_id);
  }
  if (vocab_size_ == 0) {
    vocab_size_ = model.vocab_size();
  } else if (vocab_size_ != model.vocab_size()) {
    throw std::invalid_argument("oracle vocab_size mismatch for document " +
                                doc_id);
  }
  oracles_.emplace(doc_id, std::move(model));
}

StepOutput OracleSetModel::step(const SourceDocument& doc,
                                const TokenSeq& prefix) const {
  auto it = oracles_.find(doc.id);
  if (it == oracles_.end()) {
    throw std::runtime_error("oracle set has no document " + doc.id);
  }
  return it->second.step(doc, prefix);
}

bool OracleSetModel::has_document(const std::string& doc_id) const {
  return oracles_.count(doc_id) != 0;
}

void TraceSetModel::add(const std::string& doc_id, TraceData data) {
  if (traces_.count(doc_id) != 0) {
    throw std::invalid_argument("duplicate trace for document " + doc_id);
  }
  if (vocab_size_ == 0) {
    vocab_size_ = data.vocab_size;
  } else if (vocab_size_ != data.vocab_size) {
    throw std::invalid_argument("trace vocab_size mismatch for document " +
                                doc_id);
  }
  traces_.emplace(doc_id, TraceModel(std::move(data)));
}

StepOutput TraceSetModel::step(const SourceDocument& doc,
                               const TokenSeq& prefix) const {
  auto it = traces_.find(doc.id);
  if (it == traces_.end()) {
    throw std::runtime_error("trace set has no document " + doc.id);
  }
  return it->second.step(doc, prefix);
}

bool TraceSetModel::has_document(const std::string& doc_id) const {
  return traces_.count(doc_id) != 0;
}

}  // namespace bsdar
