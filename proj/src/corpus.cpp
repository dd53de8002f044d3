#include "bsdar/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace bsdar {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, size_t line,
                       const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

std::string lowercased(std::string s) {
  for (char& c : s) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return s;
}

std::vector<std::string> parse_token_list(const json& arr,
                                          const char* what) {
  if (!arr.is_array() || arr.empty()) {
    throw std::runtime_error(std::string(what) +
                             " must be a non-empty array");
  }
  std::vector<std::string> out;
  for (const auto& v : arr) {
    if (!v.is_string() || v.get<std::string>().empty()) {
      throw std::runtime_error(std::string(what) +
                               " entries must be non-empty strings");
    }
    out.push_back(lowercased(v.get<std::string>()));
  }
  return out;
}

std::vector<std::vector<std::string>> parse_phrase_list(const json& arr,
                                                        const char* what) {
  if (!arr.is_array()) {
    throw std::runtime_error(std::string(what) + " must be an array");
  }
  std::vector<std::vector<std::string>> out;
  for (const auto& p : arr) {
    out.push_back(parse_token_list(p, what));
  }
  return out;
}

size_t draw(std::mt19937& gen, size_t n) {
  return static_cast<size_t>(gen() % n);
}

int draw_range(std::mt19937& gen, int lo, int hi) {
  return lo + static_cast<int>(draw(gen, static_cast<size_t>(hi - lo + 1)));
}

// Partial shuffle via raw engine output: first `count` entries of `pool`
// become a uniform distinct sample.
std::vector<int> draw_distinct(std::mt19937& gen, std::vector<int> pool,
                               size_t count) {
  for (size_t i = 0; i < count; ++i) {
    size_t j = i + draw(gen, pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

}  // namespace

std::vector<CorpusRecord> read_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file " + path);
  std::vector<CorpusRecord> records;
  std::set<std::string> ids;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      fail(path, line_no, e.what());
    }
    if (!rec.is_object() || !rec.contains("id") || !rec.contains("tokens") ||
        !rec.contains("keyphrases")) {
      fail(path, line_no, "record needs id, tokens, keyphrases");
    }
    if (!rec["id"].is_string() || rec["id"].get<std::string>().empty()) {
      fail(path, line_no, "id must be a non-empty string");
    }
    CorpusRecord out;
    out.id = rec["id"].get<std::string>();
    if (!ids.insert(out.id).second) {
      fail(path, line_no, "duplicate document id " + out.id);
    }
    try {
      out.tokens = parse_token_list(rec["tokens"], "tokens");
      out.keyphrases = parse_phrase_list(rec["keyphrases"], "keyphrase");
    } catch (const std::exception& e) {
      fail(path, line_no, e.what());
    }
    records.push_back(std::move(out));
  }
  return records;
}

void write_corpus(const std::string& path,
                  const std::vector<CorpusRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write corpus file " + path);
  for (const CorpusRecord& rec : records) {
    json j;
    j["id"] = rec.id;
    j["tokens"] = rec.tokens;
    j["keyphrases"] = rec.keyphrases;
    out << j.dump() << '\n';
  }
  if (!out) throw std::runtime_error("failed writing corpus file " + path);
}

Vocabulary build_vocabulary(const std::vector<CorpusRecord>& records,
                            std::size_t word_cap) {
  std::map<std::string, long> counts;
  for (const CorpusRecord& rec : records) {
    for (const std::string& tok : rec.tokens) counts[tok] += 1;
    for (const auto& phrase : rec.keyphrases) {
      for (const std::string& tok : phrase) counts[tok] += 1;
    }
  }
  std::vector<std::string> words;
  words.reserve(counts.size());
  if (word_cap != 0 && counts.size() > word_cap) {
    std::vector<std::pair<std::string, long>> ranked(counts.begin(),
                                                     counts.end());
    std::sort(ranked.begin(), ranked.end(),
              [](const auto& a, const auto& b) {
                if (a.second != b.second) return a.second > b.second;
                return a.first < b.first;
              });
    ranked.resize(word_cap);
    for (auto& [word, count] : ranked) words.push_back(std::move(word));
    std::sort(words.begin(), words.end());
  } else {
    for (const auto& [word, count] : counts) words.push_back(word);
  }
  Vocabulary vocab;
  for (const std::string& word : words) vocab.add(word);
  return vocab;
}

SourceDocument document_from_record(const CorpusRecord& rec,
                                    const Vocabulary& vocab) {
  TokenSeq ids;
  ids.reserve(rec.tokens.size());
  for (const std::string& tok : rec.tokens) ids.push_back(vocab.id(tok));
  return make_document(rec.id, std::move(ids));
}

std::vector<TokenSeq> keyphrase_ids(const CorpusRecord& rec,
                                    const Vocabulary& vocab) {
  std::vector<TokenSeq> out;
  out.reserve(rec.keyphrases.size());
  for (const auto& phrase : rec.keyphrases) {
    TokenSeq ids;
    ids.reserve(phrase.size());
    for (const std::string& tok : phrase) ids.push_back(vocab.id(tok));
    out.push_back(std::move(ids));
  }
  return out;
}

OracleSpecFile read_oracle_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open oracle spec " + path);
  OracleSpecFile spec;
  std::set<std::string> ids;
  std::string line;
  size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      fail(path, line_no, e.what());
    }
    if (!have_header) {
      for (const char* key :
           {"attention_gain", "end_bias", "distractor_gain", "seed"}) {
        if (!rec.contains(key) || !rec[key].is_number()) {
          fail(path, line_no, std::string("header needs numeric ") + key);
        }
      }
      spec.params.attention_gain = rec["attention_gain"].get<double>();
      spec.params.end_bias = rec["end_bias"].get<double>();
      spec.params.distractor_gain = rec["distractor_gain"].get<double>();
      spec.params.seed = rec["seed"].get<std::uint32_t>();
      have_header = true;
      continue;
    }
    if (!rec.contains("id") || !rec["id"].is_string() ||
        rec["id"].get<std::string>().empty()) {
      fail(path, line_no, "document line needs a non-empty id");
    }
    DocPhrases doc;
    doc.doc_id = rec["id"].get<std::string>();
    if (!ids.insert(doc.doc_id).second) {
      fail(path, line_no, "duplicate document id " + doc.doc_id);
    }
    try {
      if (rec.contains("present")) {
        doc.present = parse_phrase_list(rec["present"], "present phrase");
      }
      if (rec.contains("absent")) {
        doc.absent = parse_phrase_list(rec["absent"], "absent phrase");
      }
    } catch (const std::exception& e) {
      fail(path, line_no, e.what());
    }
    spec.docs.push_back(std::move(doc));
  }
  if (!have_header) {
    throw std::runtime_error(path + ": missing oracle parameter header");
  }
  return spec;
}

void write_oracle_spec(const std::string& path, const OracleSpecFile& spec) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write oracle spec " + path);
  json header;
  header["attention_gain"] = spec.params.attention_gain;
  header["end_bias"] = spec.params.end_bias;
  header["distractor_gain"] = spec.params.distractor_gain;
  header["seed"] = spec.params.seed;
  out << header.dump() << '\n';
  for (const DocPhrases& doc : spec.docs) {
    json j;
    j["id"] = doc.doc_id;
    j["present"] = doc.present;
    j["absent"] = doc.absent;
    out << j.dump() << '\n';
  }
  if (!out) throw std::runtime_error("failed writing oracle spec " + path);
}

OracleSpec resolve_oracle_spec(const DocPhrases& doc,
                               const OracleParams& params,
                               const Vocabulary& vocab) {
  auto to_ids = [&vocab](const std::vector<std::vector<std::string>>& phrases) {
    std::vector<TokenSeq> out;
    for (const auto& phrase : phrases) {
      TokenSeq ids;
      for (const std::string& tok : phrase) {
        TokenId id = vocab.id(tok);
        if (id == vocab.unk_id() && tok != vocab.word(vocab.unk_id())) {
          throw std::runtime_error("oracle phrase token not in vocabulary: " +
                                   tok);
        }
        ids.push_back(id);
      }
      out.push_back(std::move(ids));
    }
    return out;
  };
  OracleSpec spec;
  spec.planted_present = to_ids(doc.present);
  spec.planted_absent = to_ids(doc.absent);
  spec.attention_gain = params.attention_gain;
  spec.end_bias = params.end_bias;
  spec.distractor_gain = params.distractor_gain;
  spec.seed = params.seed;
  return spec;
}

void GeneratorParams::validate() const {
  if (num_docs < 1) throw std::invalid_argument("num_docs must be positive");
  if (word_pool < 30) throw std::invalid_argument("word_pool too small");
  if (doc_len_min < 1 || doc_len_max < doc_len_min) {
    throw std::invalid_argument("bad document length range");
  }
  if (phrases_min < 1 || phrases_max < phrases_min) {
    throw std::invalid_argument("bad phrases-per-document range");
  }
  if (heavy_docs < 0 || heavy_docs > num_docs) {
    throw std::invalid_argument("heavy_docs outside corpus");
  }
  if (heavy_docs > 0 &&
      (heavy_phrases_min < 1 || heavy_phrases_max < heavy_phrases_min)) {
    throw std::invalid_argument("bad heavy phrases range");
  }
  if (max_phrase_len < 1) {
    throw std::invalid_argument("max_phrase_len must be positive");
  }
  if (absent_per_doc < 0) {
    throw std::invalid_argument("absent_per_doc must be non-negative");
  }
  if (attention_gain <= 1.0) {
    throw std::invalid_argument("attention_gain must exceed 1");
  }
  if (end_bias < 0.0) {
    throw std::invalid_argument("end_bias must be non-negative");
  }
  int content_words = word_pool - word_pool / 10;
  int worst = std::max(phrases_max,
                       heavy_docs > 0 ? heavy_phrases_max : 0) *
              max_phrase_len;
  if (worst > content_words / 2) {
    throw std::invalid_argument("word_pool too small for phrase budget");
  }
  if (absent_per_doc * max_phrase_len > word_pool / 10) {
    throw std::invalid_argument("word_pool too small for absent phrases");
  }
}

GeneratedCorpus generate_corpus(const GeneratorParams& params) {
  params.validate();
  std::mt19937 gen(params.seed);

  const int content_words = params.word_pool - params.word_pool / 10;
  std::vector<int> content_pool(static_cast<size_t>(content_words));
  std::iota(content_pool.begin(), content_pool.end(), 0);
  std::vector<int> absent_pool(
      static_cast<size_t>(params.word_pool - content_words));
  std::iota(absent_pool.begin(), absent_pool.end(), content_words);

  auto word = [](int idx) { return "t" + std::to_string(idx); };

  GeneratedCorpus out;
  out.oracle.params = {params.attention_gain, params.end_bias,
                       params.distractor_gain, params.seed};

  for (int d = 0; d < params.num_docs; ++d) {
    const bool heavy = d < params.heavy_docs;
    const int n_phrases =
        heavy ? draw_range(gen, params.heavy_phrases_min,
                           params.heavy_phrases_max)
              : draw_range(gen, params.phrases_min, params.phrases_max);

    std::vector<int> lengths;
    int token_budget = 0;
    for (int p = 0; p < n_phrases; ++p) {
      lengths.push_back(draw_range(gen, 1, params.max_phrase_len));
      token_budget += lengths.back();
    }

    std::vector<int> phrase_tokens =
        draw_distinct(gen, content_pool, static_cast<size_t>(token_budget));
    std::set<int> in_phrase(phrase_tokens.begin(), phrase_tokens.end());

    std::vector<std::vector<int>> phrases;
    size_t cursor = 0;
    for (int len : lengths) {
      phrases.emplace_back(phrase_tokens.begin() + static_cast<long>(cursor),
                           phrase_tokens.begin() +
                               static_cast<long>(cursor + len));
      cursor += static_cast<size_t>(len);
    }

    const int doc_len = draw_range(gen, params.doc_len_min, params.doc_len_max);
    const int gaps = n_phrases + 1;
    const int filler_total = std::max(doc_len - token_budget, gaps);
    std::vector<int> gap_sizes(static_cast<size_t>(gaps),
                               filler_total / gaps);
    for (int g = 0; g < filler_total % gaps; ++g) gap_sizes[static_cast<size_t>(g)] += 1;

    auto draw_filler = [&]() {
      while (true) {
        int tok = content_pool[draw(gen, content_pool.size())];
        if (in_phrase.count(tok) == 0) return tok;
      }
    };

    CorpusRecord rec;
    rec.id = "d" + std::to_string(1000 + d).substr(1);
    for (int p = 0; p <= n_phrases; ++p) {
      for (int f = 0; f < gap_sizes[static_cast<size_t>(p)]; ++f) {
        rec.tokens.push_back(word(draw_filler()));
      }
      if (p < n_phrases) {
        for (int tok : phrases[static_cast<size_t>(p)]) {
          rec.tokens.push_back(word(tok));
        }
      }
    }

    DocPhrases doc_phrases;
    doc_phrases.doc_id = rec.id;
    for (const auto& phrase : phrases) {
      std::vector<std::string> strs;
      for (int tok : phrase) strs.push_back(word(tok));
      rec.keyphrases.push_back(strs);
      doc_phrases.present.push_back(std::move(strs));
    }

    if (params.absent_per_doc > 0) {
      std::vector<int> absent_lengths;
      int absent_budget = 0;
      for (int p = 0; p < params.absent_per_doc; ++p) {
        absent_lengths.push_back(draw_range(gen, 1, params.max_phrase_len));
        absent_budget += absent_lengths.back();
      }
      std::vector<int> absent_tokens = draw_distinct(
          gen, absent_pool, static_cast<size_t>(absent_budget));
      size_t a_cursor = 0;
      for (int len : absent_lengths) {
        std::vector<std::string> strs;
        for (int k = 0; k < len; ++k) {
          strs.push_back(word(absent_tokens[a_cursor++]));
        }
        rec.keyphrases.push_back(strs);
        doc_phrases.absent.push_back(std::move(strs));
      }
    }

    out.records.push_back(std::move(rec));
    out.oracle.docs.push_back(std::move(doc_phrases));
  }
  return out;
}

}  // namespace bsdar
